"""Command-line entry point: ``codazzi verify | catalog list | catalog emit | conventions``."""

from __future__ import annotations

import argparse
import sys

from . import catalog
from .conventions import SHEET
from .errors import CatalogNotFoundError, CodazziError
from .manifest import TOL_ENV, load_manifest
from .report import run_checks

EXIT_OK, EXIT_UNEXPECTED, EXIT_LOAD = 0, 1, 2


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="codazzi",
        description="Verify curvature identities and Codazzi-type conditions on coordinate charts.",
        epilog=f"The default tolerance is 1e-8, or the value of ${TOL_ENV} when set.",
    )
    sub = p.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", help="run the checks declared in a manifest")
    v.add_argument("manifest")
    v.add_argument("--only", help="comma-separated check names or labels")
    v.add_argument("--tol", type=_positive_float, help="tolerance for checks without their own")
    v.add_argument("--format", choices=("text", "records"), help="output format (default from the manifest)")
    v.add_argument("--backend", choices=("compiled", "python"), help="expression evaluator")
    v.add_argument("-o", "--output", help="write the report here instead of stdout")

    c = sub.add_parser("catalog", help="built-in manifests")
    csub = c.add_subparsers(dest="action", required=True)
    csub.add_parser("list", help="print the catalog names")
    e = csub.add_parser("emit", help="write a catalog manifest to a file")
    e.add_argument("name")
    e.add_argument("path")

    sub.add_parser("conventions", help="print the sign and index conventions")
    return p


def _verify(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
        selection = [s.strip() for s in args.only.split(",") if s.strip()] if args.only else None
        report = run_checks(manifest, selection, tol=args.tol, backend=args.backend)
    except CodazziError as exc:
        print(f"codazzi: error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    fmt = args.format or manifest.output_format
    text = report.to_records() if fmt == "records" else report.to_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in report.unexpected:
        why = "equivalent criteria disagree" if not r.consistent else f"expected {r.expect}"
        print(f"codazzi: {r.check} at {r.point}: residual {r.residual:.3e} vs tol {r.tol:.1e} ({why})", file=sys.stderr)
    return report.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "verify":
        return _verify(args)
    if args.verb == "conventions":
        sys.stdout.write(SHEET if SHEET.endswith("\n") else SHEET + "\n")
        return EXIT_OK
    if args.action == "list":
        for name in catalog.catalog_list():
            print(name)
        return EXIT_OK
    try:
        path = catalog.catalog_emit(args.name, args.path)
    except CatalogNotFoundError as exc:
        print(f"codazzi: error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except OSError as exc:
        print(f"codazzi: error: cannot write {args.path}: {exc}", file=sys.stderr)
        return EXIT_LOAD
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
