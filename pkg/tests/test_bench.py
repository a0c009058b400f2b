import csv
import json
import math

import numpy as np
import pytest

from bbhc import bench
from bbhc.bench import RunRow, SweepSpec, compare_baseline, emit_outputs, fit_scaling, run_sweep
from bbhc.cli import main
from bbhc.hfuncs import InvalidInput, ProblemSpec


def test_fit_recovers_exact_model():
    xs = [128, 256, 512, 1024]
    fit = fit_scaling([(x, 3 * x * math.log(x)) for x in xs])
    assert fit.b == pytest.approx(1.0, abs=1e-9)
    assert fit.a == pytest.approx(3.0, abs=1e-9)
    assert fit.residual == pytest.approx(0.0, abs=1e-18)


def test_fit_is_order_and_duplicate_invariant():
    pts = [(81, 5000.0), (243, 16000.0), (729, 51000.0)]
    base = fit_scaling(pts)
    rev = fit_scaling(pts[::-1])
    assert (rev.a, rev.b) == pytest.approx((base.a, base.b), rel=1e-12)
    exact = [(x, 2.0 * x ** 0.9 * math.log(x)) for x in (81, 243, 729)]
    dup = fit_scaling(exact + [exact[1]])
    assert (dup.a, dup.b) == pytest.approx((2.0, 0.9), rel=1e-9)


@pytest.mark.parametrize("pts", [[(128, 10.0)], [(128, 10.0), (128, 11.0)],
                                 [(128, 10.0), (256, 0.0)], [(1, 3.0), (4, 5.0)]])
def test_fit_rejects_bad_input(pts):
    with pytest.raises(InvalidInput):
        fit_scaling(pts)


def test_sweep_is_deterministic():
    sweep = SweepSpec("hiff", [32], runs_per_size=1, base_seed=4)
    a, b = run_sweep(sweep), run_sweep(sweep)
    assert [(r.seed, r.total_evals, r.which_optimum) for r in a] == \
        [(r.seed, r.total_evals, r.which_optimum) for r in b]


def test_sweep_rows_distinct_seeds_and_shuffles():
    rows = run_sweep(SweepSpec("hxor", [16, 32], runs_per_size=3, base_seed=1))
    assert len(rows) == 6
    assert len({r.seed for r in rows}) == 6
    assert len({r.shuffle_seed for r in rows}) == 6
    assert rows == sorted(rows, key=lambda r: (r.size, r.seed))


def test_sweep_spec_validation():
    with pytest.raises(InvalidInput):
        SweepSpec("hiff", [12])
    with pytest.raises(InvalidInput):
        SweepSpec("hiff", [16], runs_per_size=0)
    with pytest.raises(InvalidInput):
        SweepSpec.from_dict({"problem": "hiff", "sizes": [16], "colour": "red"})


def test_emit_empty_sweep(tmp_path):
    files = emit_outputs(tmp_path, [])
    assert files["csv"].read_text() == "size,seed,evals,success,structure_ok,optimum_id\n"


def test_emit_one_run(tmp_path):
    rows = run_sweep(SweepSpec("hiff", [16], runs_per_size=1, trace_runs=[0]))
    files = emit_outputs(tmp_path, rows)
    lines = files["csv"].read_text().splitlines()
    assert len(lines) == 2
    summary = json.loads(files["summary"].read_text())
    assert summary["per_size"]["16"]["std"] == 0.0
    assert files["traces"].exists() and files["plot"].exists()
    dot = files["dot_16_0"].read_text()
    assert dot.startswith("digraph merges {") and "->" in dot


def test_csv_reaggregates_to_summary(tmp_path):
    rows = run_sweep(SweepSpec("hiff", [16, 32], runs_per_size=4, base_seed=2))
    files = emit_outputs(tmp_path, rows)
    with open(files["csv"], newline="") as fh:
        table = list(csv.DictReader(fh))
    assert len(table) == 8
    summary = json.loads(files["summary"].read_text())
    for size in (16, 32):
        evals = [int(r["evals"]) for r in table if int(r["size"]) == size]
        assert summary["per_size"][str(size)]["mean"] == pytest.approx(np.mean(evals))
        assert summary["per_size"][str(size)]["std"] == pytest.approx(np.std(evals))


def test_emit_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match=str(blocker)):
        emit_outputs(blocker / "sub", [])


def test_summary_warns_on_non_decreasing_ratios():
    rows = [RunRow(s, 0, i, None, e, True, True, 0)
            for i, (s, e) in enumerate([(16, 100), (32, 200), (64, 500)])]
    with pytest.warns(RuntimeWarning):
        bench.summarize(rows)


def test_baseline_tiny_instances():
    report = compare_baseline(ProblemSpec.for_length("hiff", 4), 10_000, 20, seed=1)
    assert report["success_rate"] == 1.0
    report = compare_baseline(ProblemSpec.for_length("hiff", 1), 1, 5)
    assert report["success_rate"] == 1.0
    assert all(r["evals"] == 1 for r in report["rows"])


def test_baseline_budget_respected():
    report = compare_baseline(ProblemSpec.for_length("hiff", 64, shuffle_seed=1), 300, 3)
    assert all(r["evals"] <= 300 for r in report["rows"])
    assert 0 < report["mean_best_fraction"] < 1
    with pytest.raises(InvalidInput):
        compare_baseline(ProblemSpec.for_length("hiff", 4), 0, 1)


def test_cli_run_and_exit_codes(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    structure = tmp_path / "structure.json"
    code = main(["run", "--problem", "hiff", "--size", "32", "--seed", "1", "--shuffle-seed", "2",
                 "--trace", str(trace), "--structure-out", str(structure), "--require-optimum"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["reached_optimum"] and out["best_score"] == 192
    assert all("num_blocks" in json.loads(line) for line in trace.read_text().splitlines())
    assert isinstance(json.loads(structure.read_text()), list)

    code = main(["run", "--problem", "hiff", "--size", "256", "--max-evals", "10",
                 "--require-optimum"])
    assert code == 3
    with pytest.raises(SystemExit) as exc:
        main(["run", "--problem", "hiff", "--size", "24"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--problem", "nk", "--size", "16"])
    assert exc.value.code == 2


def test_cli_unshuffled_structure_export(tmp_path, capsys):
    out = tmp_path / "s.json"
    main(["run", "--problem", "hiff", "--size", "16", "--shuffle-seed", "5", "--seed", "2",
          "--structure-out", str(out), "--unshuffled"])
    capsys.readouterr()
    loci = sorted(x for b in json.loads(out.read_text()) for x in b["loci"])
    assert loci == list(range(16))


def test_cli_sweep_fit_baseline(tmp_path, capsys):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"problem": "hxor", "sizes": [16, 32, 64], "runs_per_size": 2,
                               "trace_runs": [0]}))
    out_dir = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    summary_path = out_dir / "hxor_summary.json"
    assert (out_dir / "hxor.csv").exists() and summary_path.exists()

    assert main(["fit", "--in", str(summary_path)]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["b"] == pytest.approx(json.loads(summary_path.read_text())["fit"]["b"])

    assert main(["baseline", "--problem", "hiff", "--size", "4", "--budget", "1000",
                 "--runs", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["success_rate"] == 1.0

    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--config", str(tmp_path / "missing.json"), "--out", str(out_dir)])
    assert exc.value.code == 2
