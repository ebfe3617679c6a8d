import importlib.util
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs_and_kernels_agree(tmp_path):
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    results = mod.main(["--repeat", "1", "--json", str(tmp_path / "bench.json")])
    assert len(results) == 3
    for row in results:
        assert row["max_abs_diff"] < 1e-9
    assert (tmp_path / "bench.json").exists()
