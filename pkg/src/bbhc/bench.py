"""Benchmark harness: scaling sweeps, fits, the bit-flip baseline, and output files."""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .driver import RunConfig, RunResult, run_bbhc, run_structure_correct
from .hfuncs import InvalidInput, Kind, Objective, ProblemSpec
from .hillclimb import bitflip_hill_climb

log = logging.getLogger(__name__)

CSV_HEADER = ["size", "seed", "evals", "success", "structure_ok", "optimum_id"]


@dataclass
class SweepSpec:
    kind: Kind
    sizes: list[int]
    runs_per_size: int = 30
    memory_const_c: int | None = None
    max_evals: int = 2_000_000
    stagnation_epochs: int = 5
    base_seed: int = 0
    shuffle: bool = True
    workers: int = 1
    trace_runs: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.kind = Kind(self.kind)
        if self.runs_per_size < 1:
            raise InvalidInput("runs_per_size must be >= 1")
        for size in self.sizes:
            ProblemSpec.for_length(self.kind, size)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        data = dict(data)
        data["kind"] = data.pop("problem", data.get("kind"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidInput(f"unknown sweep keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class RunRow:
    size: int
    run_index: int
    seed: int
    shuffle_seed: int | None
    total_evals: int
    reached_optimum: bool
    structure_correct: bool
    which_optimum: int | None
    trace: list[dict] | None = None
    dot: str | None = None


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    residual: float


def derive_seeds(base_seed: int, size: int, run_index: int) -> tuple[int, int]:
    run_seed, shuffle_seed = np.random.SeedSequence([base_seed, size, run_index]).generate_state(2)
    return int(run_seed), int(shuffle_seed)


def _one_run(args) -> RunRow:
    sweep, size, idx = args
    run_seed, shuffle_seed = derive_seeds(sweep.base_seed, size, idx)
    spec = ProblemSpec.for_length(sweep.kind, size, shuffle_seed=shuffle_seed if sweep.shuffle else None)
    extra = {} if sweep.memory_const_c is None else {"memory_const_c": sweep.memory_const_c}
    config = RunConfig.for_problem(
        spec, max_evals=sweep.max_evals, stagnation_epochs=sweep.stagnation_epochs,
        rng_seed=run_seed, **extra,
    )
    result = run_bbhc(spec, config)
    row = RunRow(
        size, idx, run_seed, spec.shuffle_seed, result.total_evals, result.reached_optimum,
        run_structure_correct(result, spec), result.optimum_id,
    )
    if idx in sweep.trace_runs:
        row.trace = trace_records(result)
        row.dot = merge_tree_dot(result, spec)
    return row


def run_sweep(sweep: SweepSpec) -> list[RunRow]:
    jobs = [(sweep, size, i) for size in sweep.sizes for i in range(sweep.runs_per_size)]
    if sweep.workers > 1:
        with ProcessPoolExecutor(max_workers=sweep.workers) as pool:
            rows = list(pool.map(_one_run, jobs))
    else:
        rows = [_one_run(job) for job in jobs]
    rows.sort(key=lambda r: (r.size, r.seed))
    return rows


def fit_scaling(points) -> FitResult:
    """Least squares fit of ``mean = a * size**b * ln(size)`` in log space."""
    pts = [(float(x), float(y)) for x, y in points]
    if len({x for x, _ in pts}) < 2:
        raise InvalidInput("need at least two distinct sizes")
    if any(y <= 0 or x <= 1 for x, y in pts):
        raise InvalidInput("sizes must exceed 1 and means must be positive")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    design = np.column_stack([np.ones_like(x), np.log(x)])
    target = np.log(y) - np.log(np.log(x))
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.sum((design @ coef - target) ** 2))
    return FitResult(a=float(math.exp(coef[0])), b=float(coef[1]), residual=residual)


def summarize(rows: list[RunRow]) -> dict:
    by_size: dict[int, list[RunRow]] = {}
    for r in rows:
        by_size.setdefault(r.size, []).append(r)
    sizes = sorted(by_size)
    per_size = {}
    for size in sizes:
        evals = np.array([r.total_evals for r in by_size[size]], dtype=float)
        per_size[str(size)] = {
            "runs": len(evals),
            "mean": float(evals.mean()),
            "std": float(evals.std()),
            "success_rate": float(np.mean([r.reached_optimum for r in by_size[size]])),
            "structure_rate": float(np.mean([r.structure_correct for r in by_size[size]])),
        }
    means = [per_size[str(s)]["mean"] for s in sizes]
    ratios = [means[i + 1] / means[i] for i in range(len(means) - 1)]
    if any(ratios[i + 1] > ratios[i] for i in range(len(ratios) - 1)):
        warnings.warn(f"per-size ratios are not decreasing: {ratios}", RuntimeWarning)
    summary = {"sizes": sizes, "per_size": per_size, "ratios": ratios, "fit": None}
    if len(sizes) >= 2 and all(s > 1 for s in sizes):
        summary["fit"] = asdict(fit_scaling(zip(sizes, means)))
    return summary


def compare_baseline(
    spec: ProblemSpec,
    budget: int,
    runs: int,
    seed: int = 0,
    restart_patience: int | None = None,
) -> dict:
    """Random-restart bit-flip hill-climbing with a fixed evaluation budget per run.

    A climb restarts from a fresh random genotype after ``restart_patience``
    consecutive rejected flips (default ``4 * length``).
    """
    if budget < 1:
        raise InvalidInput("budget must be >= 1")
    if restart_patience is None:
        restart_patience = 4 * spec.length
    rows = []
    for i, s in enumerate(np.random.SeedSequence(seed).spawn(runs)):
        rng = np.random.default_rng(s)
        objective = Objective(spec)
        remaining = budget
        while remaining > 0 and not objective.solved:
            start = rng.integers(0, 2, spec.length, dtype=np.int8)
            result = bitflip_hill_climb(objective, start, rng, remaining,
                                        stop_at_optimum=True, patience=restart_patience)
            remaining -= result.evals_used
        rows.append({
            "run": i,
            "success": objective.solved,
            "evals": objective.evaluations,
            "best_fraction": float(objective.best_score / objective.optimum)
            if objective.optimum else 1.0,
        })
    return {
        "rows": rows,
        "runs": runs,
        "budget": budget,
        "success_rate": float(np.mean([r["success"] for r in rows])) if rows else 0.0,
        "mean_best_fraction": float(np.mean([r["best_fraction"] for r in rows])) if rows else 0.0,
        "max_best_fraction": float(max((r["best_fraction"] for r in rows), default=0.0)),
    }


def trace_records(result: RunResult, loci_map=None) -> list[dict]:
    return [rec.to_dict(loci_map) for rec in result.epoch_trace]


def merge_tree_dot(result: RunResult, spec: ProblemSpec) -> str:
    """Graphviz source of the merge history, labelled in structural coordinates."""
    to_structural = np.arange(spec.length) if spec.shuffle is None else spec.inverse_shuffle

    def label(loci) -> str:
        s = sorted(to_structural[list(loci)].tolist())
        if s == list(range(s[0], s[0] + len(s))):
            return f"{s[0]}..{s[-1]}" if len(s) > 1 else str(s[0])
        return ",".join(map(str, s))

    lines = ["digraph merges {", "  rankdir=BT;", "  node [shape=box];"]
    current: dict[frozenset, str] = {}
    for i, block in enumerate(result.initial_structure.blocks):
        key = frozenset(block.loci.tolist())
        current[key] = f"b0_{i}"
        lines.append(f'  b0_{i} [label="{label(key)}"];')
    for rec in result.epoch_trace:
        for j, block in enumerate(rec.structure.blocks):
            key = frozenset(block.loci.tolist())
            if key in current:
                continue
            node = f"b{rec.epoch}_{j}"
            lines.append(f'  {node} [label="{label(key)}\\n|V|={block.n_configs}"];')
            for child_key in [k for k in current if k <= key]:
                lines.append(f"  {current.pop(child_key)} -> {node};")
            current[key] = node
    lines.append("}")
    return "\n".join(lines) + "\n"


PLOT_SCRIPT = '''"""Plot mean evaluations per size and the fitted a*x^b*ln(x) curve.

Usage: python plot_scaling.py summary.json [out.png]
"""
import json
import sys

import matplotlib.pyplot as plt
import numpy as np

summary = json.load(open(sys.argv[1]))
sizes = np.array(summary["sizes"], dtype=float)
means = np.array([summary["per_size"][str(int(s))]["mean"] for s in sizes])
stds = np.array([summary["per_size"][str(int(s))]["std"] for s in sizes])
plt.errorbar(sizes, means, yerr=stds, fmt="o", label="mean evaluations")
if summary.get("fit"):
    a, b = summary["fit"]["a"], summary["fit"]["b"]
    xs = np.geomspace(sizes.min(), sizes.max(), 100)
    plt.plot(xs, a * xs**b * np.log(xs), label=f"{a:.3g} x^{b:.3f} ln x")
plt.xscale("log")
plt.yscale("log")
plt.xlabel("problem size")
plt.ylabel("function evaluations")
plt.legend()
plt.savefig(sys.argv[2] if len(sys.argv) > 2 else "scaling.png", dpi=150)
'''


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def emit_outputs(out_dir, rows: list[RunRow], summary: dict | None = None,
                 prefix: str = "sweep") -> dict[str, Path]:
    out = Path(out_dir)
    written: dict[str, Path] = {}

    lines = [",".join(CSV_HEADER)]
    for r in sorted(rows, key=lambda r: (r.size, r.seed)):
        opt = "" if r.which_optimum is None else str(r.which_optimum)
        lines.append(f"{r.size},{r.seed},{r.total_evals},{int(r.reached_optimum)},"
                     f"{int(r.structure_correct)},{opt}")
    written["csv"] = out / f"{prefix}.csv"
    _write(written["csv"], "\n".join(lines) + "\n")

    if summary is None:
        summary = summarize(rows) if rows else {"sizes": [], "per_size": {}, "ratios": [], "fit": None}
    written["summary"] = out / f"{prefix}_summary.json"
    _write(written["summary"], json.dumps(summary, indent=2) + "\n")

    traced = [r for r in rows if r.trace is not None]
    if traced:
        written["traces"] = out / f"{prefix}_traces.jsonl"
        _write(written["traces"], "".join(
            json.dumps({"size": r.size, "seed": r.seed, **rec}) + "\n"
            for r in traced for rec in r.trace
        ))
    for r in rows:
        if r.dot is not None:
            path = out / f"{prefix}_{r.size}_{r.run_index}.dot"
            _write(path, r.dot)
            written[f"dot_{r.size}_{r.run_index}"] = path

    written["plot"] = out / "plot_scaling.py"
    _write(written["plot"], PLOT_SCRIPT)
    return written


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
