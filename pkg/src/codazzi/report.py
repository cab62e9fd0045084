"""Running a manifest's checks and rendering the results."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .checks import REGISTRY, run_check
from .conventions import CONVENTION_ID
from .errors import CodazziError, ManifestError
from .expr import ExprError
from .manifest import Manifest, default_tolerance

RECORD_VERSION = 1


class CheckRunError(CodazziError):
    """A lower-level error raised while evaluating one check at one point."""

    def __init__(self, check: str, point: str, cause: Exception):
        self.check = check
        self.point = point
        self.cause = cause
        super().__init__(f"check {check!r} at point {point!r}: {type(cause).__name__}: {cause}")


@dataclass
class PointResult:
    check: str  # manifest label
    name: str  # registry name
    point: str
    coords: list[float]
    residual: float
    tol: float
    expect: str
    sub: dict[str, float]
    extra: dict = field(default_factory=dict)
    consistent: bool = True

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    @property
    def expected(self) -> bool:
        """Outcome matches the declaration; two disagreeing equivalent criteria never count as expected."""
        return self.consistent and (self.passed == (self.expect == "pass"))

    def to_record(self) -> dict:
        rec = asdict(self)
        rec.update(type="result", passed=self.passed, expected=self.expected)
        return rec


@dataclass
class VerificationReport:
    manifest: str
    digest: str
    conventions: str
    results: list[PointResult]
    timing: dict[str, float] = field(default_factory=dict)  # not serialized

    @property
    def unexpected(self) -> list[PointResult]:
        return [r for r in self.results if not r.expected]

    @property
    def exit_code(self) -> int:
        return 1 if self.unexpected else 0

    def checks(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.results:
            seen.setdefault(r.check)
        return list(seen)

    # -- records --------------------------------------------------------------

    def records(self) -> list[dict]:
        head = {
            "type": "header",
            "version": RECORD_VERSION,
            "manifest": self.manifest,
            "digest": self.digest,
            "conventions": self.conventions,
        }
        summary = {
            "type": "summary",
            "results": len(self.results),
            "checks": len(self.checks()),
            "unexpected": len(self.unexpected),
            "exit_code": self.exit_code,
        }
        return [head] + [r.to_record() for r in self.results] + [summary]

    def to_records(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.records())

    @classmethod
    def from_records(cls, lines: str | Iterable[str]) -> "VerificationReport":
        if isinstance(lines, str):
            lines = lines.splitlines()
        head = None
        results = []
        derived = {"type", "passed", "expected"}
        for line in lines:
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.get("type")
            if kind == "header":
                head = rec
            elif kind == "result":
                results.append(PointResult(**{k: v for k, v in rec.items() if k not in derived}))
        if head is None:
            raise ValueError("no header record")
        return cls(head["manifest"], head["digest"], head["conventions"], results)

    # -- text -----------------------------------------------------------------

    def to_text(self) -> str:
        rows = [("check", "points", "worst residual", "worst point", "tol", "verdict")]
        notes = []
        for label in self.checks():
            rs = [r for r in self.results if r.check == label]
            worst = max(rs, key=lambda r: r.residual)
            exp = rs[0].expect
            bad = [r for r in rs if not r.expected]
            if any(not r.consistent for r in rs):
                verdict = "INCONSISTENT"
            elif bad:
                verdict = "FAIL" if exp == "pass" else "UNEXPECTED PASS"
            else:
                verdict = "pass" if exp == "pass" else "fail (expected)"
            rows.append((label, str(len(rs)), f"{worst.residual:.3e}", worst.point, f"{worst.tol:.1e}", verdict))
            wit = worst.extra.get("witness")
            if wit and worst.residual > 0:
                notes.append(f"  {label}: worst triple (X, Y, Z) = {tuple(wit)} at {worst.point}")
            if "triples" in worst.extra:
                counts = sorted({r.extra["triples"] for r in rs})
                notes.append(f"  {label}: admissible triples per point {counts}")
        widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
        lines = [f"manifest {self.manifest}  sha256 {self.digest[:16]}  conventions {self.conventions}"]
        for i, row in enumerate(rows):
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        lines.extend(notes)
        n_bad = len(self.unexpected)
        status = "all verdicts as declared" if not n_bad else f"{n_bad} unexpected result(s)"
        elapsed = self.timing.get("total")
        tail = f" in {elapsed:.2f}s" if elapsed is not None else ""
        lines.append(f"{len(self.results)} results over {len(self.checks())} checks{tail}: {status}")
        return "\n".join(lines) + "\n"


def run_checks(
    manifest: Manifest,
    selection: Sequence[str] | None = None,
    tol: float | None = None,
    backend: str | None = None,
) -> VerificationReport:
    """Evaluate the selected checks (by name or label) at every sample point.

    A per-check ``tol`` in the manifest wins over ``tol``, which wins over the
    environment default.
    """
    t0 = time.perf_counter()
    specs = manifest.checks
    if selection:
        wanted = list(dict.fromkeys(selection))
        known = {c.check for c in specs} | {c.label for c in specs}
        missing = [s for s in wanted if s not in known]
        if missing:
            raise ManifestError(f"--only names checks not declared in the manifest: {missing}", "checks")
        specs = [c for c in specs if c.check in wanted or c.label in wanted]
    base_tol = default_tolerance() if tol is None else float(tol)

    names = list(manifest.points)
    try:
        frames = manifest.manifold.frames([manifest.points[k] for k in names], backend=backend)
    except (CodazziError, ExprError, ArithmeticError) as exc:
        where = getattr(exc, "point", None)
        hits = [k for k in names if where is not None and manifest.points[k] == tuple(where)]
        raise CheckRunError("<engine>", hits[0] if hits else ",".join(names), exc) from exc
    t1 = time.perf_counter()

    results = []
    for spec in specs:
        defn = REGISTRY[spec.check]
        t = spec.tol if spec.tol is not None else base_tol
        for pname, frame in zip(names, frames):
            try:
                out = run_check(defn, frame, t, spec.bindings, spec.options)
            except (CodazziError, ExprError, ArithmeticError, ValueError) as exc:
                raise CheckRunError(spec.label, pname, exc) from exc
            results.append(
                PointResult(
                    check=spec.label,
                    name=spec.check,
                    point=pname,
                    coords=[float(x) for x in manifest.points[pname]],
                    residual=float(out.residual),
                    tol=float(t),
                    expect=spec.expect,
                    sub={k: float(v) for k, v in out.sub.items()},
                    extra=out.extra,
                    consistent=bool(out.consistent),
                )
            )
    t2 = time.perf_counter()
    return VerificationReport(
        manifest.name,
        manifest.digest,
        CONVENTION_ID,
        results,
        {"frames": t1 - t0, "checks": t2 - t1, "total": t2 - t0},
    )
