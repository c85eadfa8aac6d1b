import csv
import json

import numpy as np
import pytest

from dqsimon.cli import BENCH_COLUMNS, bench_grid, main, run_bench, trial_seed
from dqsimon.gf2 import BitVector, Gf2Basis
from dqsimon.instance import HspInstance, ProblemParams, generate, plant


def test_generate_round_trip(tmp_path, capsys):
    out = tmp_path / "i.json"
    assert main(["generate", "--n", "4", "--t", "1", "--m", "3", "--k", "1", "--seed", "7", "--out", str(out)]) == 0
    loaded = HspInstance.load(out)
    fresh = generate(ProblemParams(4, 1, 3, 1, 7))
    assert np.array_equal(loaded.f_table, fresh.f_table)
    assert loaded.s_basis == fresh.s_basis


@pytest.mark.parametrize("m, k", [(1, 1), (3, 0)])
def test_generate_infeasible(tmp_path, capsys, m, k):
    rc = main(["generate", "--n", "4", "--t", "1", "--m", str(m), "--k", str(k), "--out", str(tmp_path / "x.json")])
    assert rc == 2
    assert "m ≥ n−k violated" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "4"])
    assert exc.value.code == 1
    assert main(["solve", str(tmp_path / "missing.json")]) == 1


def test_solve_full_is_exact_and_reproducible(tmp_path, capsys):
    inst = tmp_path / "i.json"
    generate(ProblemParams(6, 2, 4, 2, 3)).save(inst)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", str(inst), "--seed", "4", "--out", str(a)]) == 0
    assert "exact: true" in capsys.readouterr().out
    assert main(["solve", str(inst), "--seed", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    trace = json.loads(a.read_text())
    assert {"iterations", "nodes", "subgroup", "diagnostics"} <= set(trace)
    assert trace["subgroup"] == sorted(trace["subgroup"])


def test_solve_ds_with_perturbed_sl(tmp_path, capsys):
    inst = tmp_path / "i.json"
    plant(ProblemParams(3, 1, 2, 1, 0), Gf2Basis(3, (BitVector.from_str("110"),))).save(inst)
    assert main(["solve", str(inst), "--algorithm", "ds", "--sl", "10,01"]) == 3
    out = capsys.readouterr().out
    assert "exact: false" in out
    assert "witness: 110" in out


def test_verify(tmp_path, capsys):
    path = tmp_path / "i.json"
    inst = generate(ProblemParams(5, 1, 4, 2, 1))
    inst.save(path)
    assert main(["verify", str(path)]) == 0
    data = json.loads(path.read_text())
    data["f_table"][0] = format(int(data["f_table"][0], 16) ^ 1, "x")
    path.write_text(json.dumps(data))
    report = tmp_path / "r.json"
    assert main(["verify", str(path), "--out", str(report)]) == 2
    checks = {c["name"]: c for c in json.loads(report.read_text())}
    assert not checks["promise"]["passed"]
    assert checks["promise"]["counterexample"]


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "--n", "3-5", "--t", "1,2", "--trials", "3", "--seed", "9", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "success_rate: 1.0" in text
    rows = list(csv.DictReader(out.open()))
    assert tuple(rows[0]) == BENCH_COLUMNS
    for r in rows:
        n, t = int(r["n"]), int(r["t"])
        assert int(r["iterations"]) <= n - t
        assert int(r["quantum_queries_per_node"]) <= 6 * (n - t)
        assert r["exact_success"] == "True"


def test_bench_reproducible_and_ordered():
    tasks = bench_grid([3, 4], [1, 2], trials=2, master_seed=5)
    assert tasks == bench_grid([3, 4], [1, 2], trials=2, master_seed=5)
    assert tasks[0][4] == trial_seed(5, 3, 1, 3, 0, 0)
    serial = run_bench(tasks)
    pooled = run_bench(tasks, workers=2)
    strip = lambda rows: [(r.n, r.t, r.k, r.seed, r.iterations, r.exact_success) for r in rows]
    assert strip(serial) == strip(pooled)


def test_witness_command(capsys):
    assert main(["witness", "--max-n", "4"]) == 0
    found = json.loads(capsys.readouterr().out)
    assert found["missing"]
