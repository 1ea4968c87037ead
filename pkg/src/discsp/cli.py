"""Command-line interface: benchmark driver, single-instance solve, and
instance generation."""

from __future__ import annotations

import argparse
import sys

from . import problemio
from .experiments import (ExperimentConfig, SUMMARY_FIELDS, run_experiment,
                          summarize, trend_check, write_csv)
from .generators import FAMILIES
from .model import evaluate
from .runtime import RunConfig
from .solvers import SOLVERS, run_solver


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _csv_strs(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discsp",
        description="Privacy-graded distributed constraint satisfaction "
                    "solvers, simulator and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark experiment grid")
    bench.add_argument("--family", choices=sorted(FAMILIES), default="coloring")
    bench.add_argument("--sizes", type=_csv_ints, default=(3, 4, 5),
                       help="comma-separated instance sizes")
    bench.add_argument("--instances", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--solvers", type=_csv_strs,
                       default=("dpop", "pdpop_plus"),
                       help=f"comma-separated; known: {sorted(SOLVERS)}")
    bench.add_argument("--key-bits", type=int, default=512)
    bench.add_argument("--b-bits", type=int, default=128)
    bench.add_argument("--incr-min", type=int, default=10)
    bench.add_argument("--timeout-secs", type=float, default=600.0)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", default="bench",
                       help="output prefix: writes <out>_runs.csv and "
                            "<out>_summary.csv")

    solve = sub.add_parser("solve", help="solve one problem file")
    solve.add_argument("problem", help="path to a problem file")
    solve.add_argument("--solver", choices=sorted(SOLVERS), default="dpop")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--key-bits", type=int, default=512)
    solve.add_argument("--b-bits", type=int, default=128)
    solve.add_argument("--incr-min", type=int, default=10)
    solve.add_argument("--timeout-secs", type=float, default=None)

    gen = sub.add_parser("gen", help="generate a benchmark instance file")
    gen.add_argument("--family", choices=sorted(FAMILIES), default="coloring")
    gen.add_argument("--size", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    return parser


def cmd_bench(args) -> int:
    unknown = [s for s in args.solvers if s not in SOLVERS]
    if unknown:
        print(f"unknown solvers: {unknown}", file=sys.stderr)
        return 2
    cfg = ExperimentConfig(
        family=args.family, sizes=args.sizes, instances=args.instances,
        seed=args.seed, solvers=args.solvers, key_bits=args.key_bits,
        b_bits=args.b_bits, incr_min=args.incr_min,
        timeout_secs=args.timeout_secs, workers=args.workers)
    rows = run_experiment(cfg)
    summary = summarize(rows)
    runs_path = f"{args.out}_runs.csv"
    summary_path = f"{args.out}_summary.csv"
    write_csv(rows, runs_path)
    write_csv(summary, summary_path, SUMMARY_FIELDS)
    mismatches = [r for r in rows if r["oracle_ok"] is False]
    timeouts = [r for r in rows if r["status"] == "timeout"]
    print(f"wrote {len(rows)} runs to {runs_path}")
    print(f"wrote {len(summary)} summary rows to {summary_path}")
    print(f"oracle mismatches: {len(mismatches)}; timeouts: {len(timeouts)}")
    for line in trend_check(summary):
        print(line)
    return 0


def cmd_solve(args) -> int:
    problem = problemio.load(args.problem)
    cfg = RunConfig(key_bits=args.key_bits, b_bits=args.b_bits,
                    incr_min=args.incr_min, timeout_secs=args.timeout_secs)
    result = run_solver(args.solver, problem, args.seed, cfg)
    print(f"solver: {args.solver}")
    print(f"feasible: {result.feasible}")
    print(f"iterations: {result.iterations}")
    print(f"messages: {result.metrics.message_count} "
          f"({result.metrics.info_bytes} bytes), "
          f"simulated time {result.metrics.simulated_time}")
    for agent in sorted(result.per_agent):
        for var, value in sorted(result.per_agent[agent].items()):
            print(f"  {agent}: {var} = {value}")
    if result.feasible:
        joint = result.joint_assignment()
        if set(joint) == set(problem.variables):
            print(f"violations (harness check): {evaluate(problem, joint)}")
    return 0


def cmd_gen(args) -> int:
    problem = FAMILIES[args.family](args.size, args.seed)
    problemio.dump(problem, args.out)
    print(f"wrote {args.family} instance (n={len(problem.variables)} "
          f"variables, {len(problem.constraints)} constraints) to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench":
        return cmd_bench(args)
    if args.command == "solve":
        return cmd_solve(args)
    if args.command == "gen":
        return cmd_gen(args)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
