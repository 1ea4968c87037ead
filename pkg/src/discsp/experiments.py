"""Experiment driver: run solver/instance grids, collect metrics, summarize.

Emits one CSV row per (family, size, instance, solver) run plus a summary
CSV of medians with 95% order-statistic confidence intervals.  Instances
may run in parallel across a process pool; each simulation stays internally
deterministic.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass

from .generators import FAMILIES
from .model import evaluate
from .oracle import OracleCapExceeded, brute_force
from .runtime import RunConfig, SimTimeout
from .solvers import run_solver

RUN_FIELDS = [
    "family", "size", "instance", "seed", "solver", "status", "feasible",
    "oracle_feasible", "oracle_ok", "solution_valid", "simulated_time",
    "message_count", "info_bytes", "sep_max", "iterations", "wall_ms",
]

SUMMARY_FIELDS = [
    "family", "size", "solver", "metric", "count", "median", "ci_lo", "ci_hi",
]

SUMMARY_METRICS = ["simulated_time", "message_count", "info_bytes", "sep_max"]


@dataclass
class ExperimentConfig:
    family: str = "coloring"
    sizes: tuple[int, ...] = (3, 4, 5)
    instances: int = 5
    seed: int = 0
    solvers: tuple[str, ...] = ("dpop", "pdpop_plus")
    key_bits: int = 512
    b_bits: int = 128
    incr_min: int = 10
    timeout_secs: float | None = 600.0
    oracle_cap: int = 10 ** 6
    workers: int = 1

    def run_config(self) -> RunConfig:
        return RunConfig(key_bits=self.key_bits, b_bits=self.b_bits,
                         incr_min=self.incr_min,
                         timeout_secs=self.timeout_secs)


def instance_seed(base: int, family: str, size: int, index: int) -> int:
    return (base * 1000003 + hashs(family) * 9176 + size * 131 + index) % (1 << 62)


def hashs(s: str) -> int:
    out = 0
    for ch in s:
        out = (out * 33 + ord(ch)) % (1 << 32)
    return out


def _run_one(task: dict) -> dict:
    family, size, index = task["family"], task["size"], task["index"]
    solver = task["solver"]
    seed = task["seed"]
    cfg = RunConfig(**task["run_config"])
    problem = FAMILIES[family](size, seed)
    row = {
        "family": family, "size": size, "instance": index, "seed": seed,
        "solver": solver, "status": "ok", "feasible": "",
        "oracle_feasible": "", "oracle_ok": "", "solution_valid": "",
        "simulated_time": "", "message_count": "", "info_bytes": "",
        "sep_max": "", "iterations": "", "wall_ms": "",
    }
    t0 = time.perf_counter()
    try:
        result = run_solver(solver, problem, seed, cfg)
    except SimTimeout:
        row["status"] = "timeout"
        row["wall_ms"] = round(1000 * (time.perf_counter() - t0), 1)
        return row
    row["wall_ms"] = round(1000 * (time.perf_counter() - t0), 1)
    row["feasible"] = result.feasible
    row["simulated_time"] = result.metrics.simulated_time
    row["message_count"] = result.metrics.message_count
    row["info_bytes"] = result.metrics.info_bytes
    row["sep_max"] = result.metrics.sep_max
    row["iterations"] = result.iterations
    try:
        o = brute_force(problem, cap=task["oracle_cap"])
    except OracleCapExceeded:
        return row
    row["oracle_feasible"] = o.feasible
    ok = result.feasible == o.feasible
    if result.feasible:
        joint = result.joint_assignment()
        valid = (set(joint) == set(problem.variables)
                 and evaluate(problem, joint) == 0)
        row["solution_valid"] = valid
        ok = ok and valid
    row["oracle_ok"] = ok
    return row


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    tasks = []
    for size in cfg.sizes:
        for index in range(cfg.instances):
            seed = instance_seed(cfg.seed, cfg.family, size, index)
            for solver in cfg.solvers:
                tasks.append({
                    "family": cfg.family, "size": size, "index": index,
                    "seed": seed, "solver": solver,
                    "run_config": vars(cfg.run_config()),
                    "oracle_cap": cfg.oracle_cap,
                })
    if cfg.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_one, tasks))
    return [_run_one(t) for t in tasks]


def median_ci(values, confidence: float = 0.95):
    """Median with a distribution-free order-statistic confidence interval
    (binomial ranks)."""
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        return None, None, None
    med = statistics.median(xs)
    alpha = (1 - confidence) / 2
    r, cdf = 0, 0.0
    for k in range(n):
        nxt = cdf + math.comb(n, k) * 0.5 ** n
        if nxt <= alpha:
            cdf, r = nxt, k + 1
        else:
            break
    lo = xs[max(r - 1, 0)]
    hi = xs[min(n - r, n - 1)]
    return med, lo, hi


def summarize(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        groups.setdefault((row["family"], row["size"], row["solver"]),
                          []).append(row)
    out = []
    for (family, size, solver), members in sorted(groups.items()):
        for metric in SUMMARY_METRICS:
            values = [m[metric] for m in members if m[metric] != ""]
            med, lo, hi = median_ci(values)
            out.append({
                "family": family, "size": size, "solver": solver,
                "metric": metric, "count": len(values), "median": med,
                "ci_lo": lo, "ci_hi": hi,
            })
    return out


SOLVER_PRIVACY_RANK = {
    "dpop": 0, "pdpop": 1, "pdpop_plus": 1,
    "p32": 2, "p32_plus": 2, "p2": 3, "p2_plus": 3,
}


def trend_check(summary: list[dict]) -> list[str]:
    """Soft consistency check: more privacy should not be cheaper.

    Compares medians of simulated time and info bytes across the privacy
    ladder P-DPOP <= P^3/2 <= P^2 per (family, size); reports log lines,
    never raises."""
    lines = []
    table: dict[tuple, dict[str, float]] = {}
    for row in summary:
        if row["metric"] in ("simulated_time", "info_bytes") and row["median"] is not None:
            table.setdefault((row["family"], row["size"], row["metric"]),
                             {})[row["solver"]] = row["median"]
    for (family, size, metric), per_solver in sorted(table.items()):
        ranked = sorted(per_solver.items(),
                        key=lambda kv: SOLVER_PRIVACY_RANK.get(kv[0], 9))
        for (s1, v1), (s2, v2) in zip(ranked, ranked[1:]):
            r1 = SOLVER_PRIVACY_RANK.get(s1, 9)
            r2 = SOLVER_PRIVACY_RANK.get(s2, 9)
            if r1 >= r2:
                continue
            status = "OK" if v1 <= v2 else "VIOLATION"
            lines.append(
                f"TREND {status} {family} n={size} {metric}: "
                f"{s1}={v1} <= {s2}={v2}")
    return lines


def write_csv(rows: list[dict], path, fields=None):
    fields = fields or RUN_FIELDS
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
