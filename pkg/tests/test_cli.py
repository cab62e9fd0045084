import json
import subprocess
import sys
import textwrap

import pytest

from codazzi import catalog, cli
from codazzi.errors import CatalogNotFoundError, ManifestError
from codazzi.manifest import load_manifest, loads
from codazzi.report import CheckRunError, VerificationReport, run_checks

SPHERE = textwrap.dedent(
    """\
    schema: 1
    name: sphere
    chart: {coords: [th, ph]}
    metric:
      "th,th": "1"
      "ph,ph": "sin(th)^2"
    fields:
      b: {kind: sym2, components: {"th,th": "2", "ph,ph": "2*sin(th)^2"}}
      beta: {kind: covector, components: ["1", "0"]}
    points:
      a: [0.5, 0.0]
      b: [1.5, 1.0]
    checks:
      - {check: codazzi, b: b}
      - {check: codazzi, b: ricci, tol: 1e-12}
    """
)


def write(tmp_path, text, name="m.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# manifest loading
# ---------------------------------------------------------------------------


class TestManifest:
    def test_catalog_sphere(self):
        m = catalog.catalog_load("s2_round")
        kinds = [f.kind for f in m.manifold.fields.values()]
        assert kinds == ["sym2"]
        assert len(m.points) >= 5

    def test_numeric_strings_are_coerced(self):
        m = loads(SPHERE)
        assert m.checks[1].tol == 1e-12

    def test_grid(self):
        text = SPHERE.replace("points:\n  a: [0.5, 0.0]\n  b: [1.5, 1.0]\n", "grids:\n  - {name: g, axes: [[0.5, 2.5, 3], [0, 1, 2]]}\n")
        m = loads(text)
        assert list(m.points) == [f"g_{k}" for k in range(6)]
        assert m.points["g_5"] == (2.5, 1.0)

    def test_wrong_kind_names_check(self):
        with pytest.raises(ManifestError) as info:
            loads(SPHERE + "  - {check: codazzi, b: beta}\n")
        msg = str(info.value)
        assert "codazzi" in msg and "beta" in msg and "checks.2.b" in msg

    def test_singular_point_named(self):
        with pytest.raises(ManifestError, match="'north'"):
            loads(SPHERE.replace("a: [0.5, 0.0]", "north: [0.0, 0.0]"))

    def test_expression_error_has_location(self, tmp_path):
        path = write(tmp_path, SPHERE.replace('"ph,ph": "sin(th)^2"', '"ph,ph": "sin(th)^"'))
        with pytest.raises(ManifestError) as info:
            load_manifest(path)
        assert f"{path}:6" in str(info.value)
        assert info.value.key_path == "metric.ph,ph"

    @pytest.mark.parametrize(
        "old, new, key",
        [
            ("schema: 1", "schema: 2", "schema"),
            ("{check: codazzi, b: b}", "{check: nope}", "checks.0.check"),
            ("{check: codazzi, b: b}", "{check: codazzi, b: missing}", "checks.0.b"),
            ("{check: codazzi, b: b}", "{check: codazzi, b: b, cluster_tol: 1}", "checks.0.cluster_tol"),
            ("{check: codazzi, b: b}", "{check: weyl_form}", "checks.0"),
            ("{check: codazzi, b: b}", "{check: codazzi, b: b, expect: maybe}", "checks.0.expect"),
            ("a: [0.5, 0.0]", "a: [0.5]", "points.a"),
            ("a: [0.5, 0.0]", "a: [0.5, nan]", "points.a.1"),
            ('"th,th": "1"', '"th,r": "1"', "metric.th,r"),
            ("name: sphere", "nmae: sphere", "nmae"),
        ],
    )
    def test_schema_errors_carry_key_path(self, old, new, key):
        assert old in SPHERE
        with pytest.raises(ManifestError) as info:
            loads(SPHERE.replace(old, new))
        assert info.value.key_path == key

    def test_duplicate_labels(self):
        with pytest.raises(ManifestError, match="duplicate"):
            loads(SPHERE + "  - {check: codazzi, b: b}\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(tmp_path / "absent.yaml")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


class TestReport:
    def test_every_check_at_every_point(self):
        rep = run_checks(loads(SPHERE))
        assert [(r.check, r.point) for r in rep.results] == [
            ("codazzi/b", "a"), ("codazzi/b", "b"), ("codazzi/ricci", "a"), ("codazzi/ricci", "b")
        ]
        assert rep.exit_code == 0

    def test_tolerance_precedence(self, monkeypatch):
        m = loads(SPHERE)
        monkeypatch.setenv("CODAZZI_TOL", "1e-3")
        rep = run_checks(m)
        assert [r.tol for r in rep.results] == [1e-3, 1e-3, 1e-12, 1e-12]
        rep = run_checks(m, tol=1e-5)
        assert [r.tol for r in rep.results] == [1e-5, 1e-5, 1e-12, 1e-12]

    def test_selection(self):
        m = loads(SPHERE)
        assert {r.check for r in run_checks(m, ["codazzi/ricci"]).results} == {"codazzi/ricci"}
        assert len(run_checks(m, ["codazzi"]).results) == 4
        with pytest.raises(ManifestError):
            run_checks(m, ["harmonic_curvature"])

    def test_records_round_trip(self):
        rep = run_checks(catalog.catalog_load("s2xs2"))
        text = rep.to_records()
        again = VerificationReport.from_records(text)
        assert again.to_records() == text
        assert again.exit_code == rep.exit_code

    def test_verdict_recomputable_from_record(self):
        rep = run_checks(catalog.catalog_load("bump4d"))
        for line in rep.to_records().splitlines():
            rec = json.loads(line)
            if rec["type"] == "result":
                assert rec["passed"] == (rec["residual"] <= rec["tol"])
                assert rec["expected"] == (rec["consistent"] and rec["passed"] == (rec["expect"] == "pass"))

    def test_records_exclude_timing(self):
        text = run_checks(loads(SPHERE)).to_records()
        assert "time" not in text and "elapsed" not in text

    def test_invariance_witness_and_count(self):
        rep = run_checks(catalog.catalog_load("s2xs2"), ["invariance"])
        assert all(r.extra["triples"] == 16 and not r.extra["vacuous"] for r in rep.results)

    def test_expect_fail_flips(self):
        m = loads(SPHERE.replace("{check: codazzi, b: b}", "{check: codazzi, b: b, expect: fail}"))
        rep = run_checks(m)
        assert rep.exit_code == 1
        assert {r.point for r in rep.unexpected} == {"a", "b"}

    def test_domain_error_tagged_with_point(self):
        text = SPHERE.replace('"th,th": "2"', '"th,th": "2 + log(th - 1)"')
        with pytest.raises(CheckRunError) as info:
            run_checks(loads(text))
        assert info.value.point == "a"

    def test_text_table(self):
        out = run_checks(catalog.catalog_load("bump4d")).to_text()
        assert "fail (expected)" in out and "worst point" in out


# ---------------------------------------------------------------------------
# catalog and command line
# ---------------------------------------------------------------------------


def test_catalog_list():
    names = catalog.catalog_list()
    assert len(names) >= 10
    for required in ["flat_r2", "flat_r4", "s2_round", "s3_round", "hyperbolic2", "s2xs2", "warped4d", "bump4d", "gauged_exp", "recurrence_flat"]:
        assert required in names


def test_catalog_missing():
    with pytest.raises(CatalogNotFoundError):
        catalog.catalog_emit("nonexistent", "/tmp/never.yaml")


def test_emit_then_verify(tmp_path, capsys):
    assert cli.main(["catalog", "emit", "s2xs2", str(tmp_path)]) == 0
    path = tmp_path / "s2xs2.yaml"
    assert path.exists()
    capsys.readouterr()
    assert cli.main(["verify", str(path), "--only", "codazzi,identity_2_1,K_symmetries,invariance", "--tol", "1e-8"]) == 0
    out = capsys.readouterr().out
    assert "invariance/ricci" in out and "FAIL" not in out


def test_cli_exit_codes(tmp_path, capsys, monkeypatch):
    path = write(tmp_path, SPHERE)
    assert cli.main(["verify", str(path)]) == 0
    bad = write(tmp_path, SPHERE + "  - {check: codazzi, b: beta}\n", "bad.yaml")
    assert cli.main(["verify", str(bad)]) == 2
    assert "codazzi" in capsys.readouterr().err
    monkeypatch.setenv("CODAZZI_TOL", "1e-40")
    assert cli.main(["verify", str(path), "--only", "codazzi/b"]) == 1
    assert cli.main(["verify", str(path), "--only", "codazzi/b", "--tol", "1e-6"]) == 0
    assert cli.main(["catalog", "emit", "nonexistent", str(tmp_path / "x.yaml")]) == 2


def test_cli_records_and_output_file(tmp_path, capsys):
    path = write(tmp_path, SPHERE)
    out = tmp_path / "report.jsonl"
    assert cli.main(["verify", str(path), "--format", "records", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert json.loads(lines[0])["type"] == "header"
    assert json.loads(lines[-1]) == {"checks": 2, "exit_code": 0, "results": 4, "type": "summary", "unexpected": 0}


def test_conventions(capsys):
    assert cli.main(["conventions"]) == 0
    out = capsys.readouterr().out
    assert "codazzi-conventions/1" in out and "R_kl = -R_mkl^m" in out


def test_catalog_list_command(capsys):
    assert cli.main(["catalog", "list"]) == 0
    assert capsys.readouterr().out.split() == catalog.catalog_list()


def test_module_entry_point(tmp_path):
    path = write(tmp_path, SPHERE)
    proc = subprocess.run([sys.executable, "-m", "codazzi.cli", "verify", str(path), "--format", "records"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("\n") == 6
