"""Command line entry point: ``bbhc run|sweep|fit|baseline``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .driver import RunConfig, run_bbhc, run_structure_correct
from .hfuncs import InvalidInput, Kind, ProblemSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_SOLVED = 3


def _problem(parser, kind: str, size: int, shuffle_seed) -> ProblemSpec:
    try:
        return ProblemSpec.for_length(Kind(kind), size, shuffle_seed=shuffle_seed)
    except InvalidInput as e:
        parser.error(str(e))


def cmd_run(args, parser) -> int:
    spec = _problem(parser, args.problem, args.size, args.shuffle_seed)
    extra = {} if args.memory_const is None else {"memory_const_c": args.memory_const}
    try:
        config = RunConfig.for_problem(spec, max_evals=args.max_evals, rng_seed=args.seed,
                                       stagnation_epochs=args.stagnation_epochs, **extra)
    except ValueError as e:
        parser.error(str(e))
    result = run_bbhc(spec, config)
    summary = result.summary()
    summary["structure_correct"] = run_structure_correct(result, spec)
    summary["problem"] = spec.to_dict()

    loci_map = None
    if args.unshuffled and spec.shuffle is not None:
        inverse = spec.inverse_shuffle
        loci_map = lambda x: int(inverse[x])  # noqa: E731
    if args.trace:
        bench._write(Path(args.trace), "".join(
            json.dumps(rec) + "\n" for rec in bench.trace_records(result, loci_map)))
    if args.structure_out:
        bench._write(Path(args.structure_out),
                     json.dumps(result.final_structure.to_json(loci_map)) + "\n")
    print(json.dumps(summary, indent=2))
    if args.require_optimum and not result.reached_optimum:
        return EXIT_NOT_SOLVED
    return EXIT_OK


def cmd_sweep(args, parser) -> int:
    try:
        sweep = bench.SweepSpec.from_dict(json.loads(Path(args.config).read_text()))
    except (OSError, ValueError, TypeError, KeyError) as e:
        parser.error(f"bad sweep config {args.config}: {e}")
    if args.workers is not None:
        sweep.workers = args.workers
    rows = bench.run_sweep(sweep)
    summary = bench.summarize(rows)
    written = bench.emit_outputs(args.out, rows, summary, prefix=sweep.kind.value)
    print(json.dumps({"summary": summary, "files": {k: str(v) for k, v in written.items()}},
                     indent=2))
    return EXIT_OK


def cmd_fit(args, parser) -> int:
    try:
        summary = json.loads(Path(args.input).read_text())
        points = [(s, summary["per_size"][str(s)]["mean"]) for s in summary["sizes"]]
        fit = bench.fit_scaling(points)
    except (OSError, ValueError, KeyError) as e:
        parser.error(f"cannot fit {args.input}: {e}")
    print(json.dumps({"a": fit.a, "b": fit.b, "residual": fit.residual}))
    return EXIT_OK


def cmd_baseline(args, parser) -> int:
    spec = _problem(parser, args.problem, args.size, args.shuffle_seed)
    if args.budget < 1 or args.runs < 1:
        parser.error("budget and runs must be positive")
    report = bench.compare_baseline(spec, args.budget, args.runs, seed=args.seed)
    if not args.rows:
        report.pop("rows")
    print(json.dumps(report, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbhc", description="Building-block hill-climber")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    problems = [k.value for k in Kind]

    run = sub.add_parser("run", help="solve one problem instance")
    run.add_argument("--problem", choices=problems, required=True)
    run.add_argument("--size", type=int, required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--shuffle-seed", type=int, default=None)
    run.add_argument("--memory-const", type=int, default=None)
    run.add_argument("--max-evals", type=int, default=2_000_000)
    run.add_argument("--stagnation-epochs", type=int, default=5)
    run.add_argument("--trace", help="write per-epoch JSON lines here")
    run.add_argument("--structure-out", help="write the final block structure as JSON here")
    run.add_argument("--unshuffled", action="store_true",
                     help="export loci in structural rather than genotype coordinates")
    run.add_argument("--require-optimum", action="store_true",
                     help="exit with status 3 unless a global optimum is reached")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run a scaling sweep described by a JSON file")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.set_defaults(func=cmd_sweep)

    fit = sub.add_parser("fit", help="fit a*x^b*ln(x) to a sweep summary")
    fit.add_argument("--in", dest="input", required=True)
    fit.set_defaults(func=cmd_fit)

    base = sub.add_parser("baseline", help="random-restart bit-flip hill-climber")
    base.add_argument("--problem", choices=problems, required=True)
    base.add_argument("--size", type=int, required=True)
    base.add_argument("--budget", type=int, required=True)
    base.add_argument("--runs", type=int, default=100)
    base.add_argument("--seed", type=int, default=0)
    base.add_argument("--shuffle-seed", type=int, default=None)
    base.add_argument("--rows", action="store_true", help="include per-run rows")
    base.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
