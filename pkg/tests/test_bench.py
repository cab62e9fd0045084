import importlib.util
import pathlib

SCRIPT = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernel.py"


def test_benchmark_runs(capsys):
    spec = importlib.util.spec_from_file_location("bench_kernel", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--points", "20", "--repeat", "1", "s2_round"]) == 0
    assert "s2_round" in capsys.readouterr().out
    row = mod.bench("flat_r2", 10, 1)
    if "compiled" in row:
        assert row["max_rel_diff"] <= 1e-13
