"""Solver registry and the top-level simulation entry point."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Problem, pad_domains
from .runtime import Metrics, RunConfig, Sim, Transcript


@dataclass(frozen=True)
class SolverSpec:
    name: str
    factory: object
    pad_default: bool


SOLVERS: dict[str, SolverSpec] = {}


def register_solver(name: str, factory, pad_default: bool):
    SOLVERS[name] = SolverSpec(name, factory, pad_default)


@dataclass
class RunResult:
    solver: str
    feasible: "bool | None"
    per_agent: dict            # agent -> {variable: value}
    metrics: Metrics
    transcript: Transcript
    iterations: int = 1
    min_violations: "int | None" = None
    debug: dict = field(default_factory=dict)

    def joint_assignment(self) -> dict:
        """Test-harness omniscience: merge all agents' local outputs."""
        out = {}
        for local in self.per_agent.values():
            out.update(local)
        return out


def run_solver(name: str, problem: Problem, seed: int,
               config: RunConfig | None = None) -> RunResult:
    """Simulate one solver end to end on one problem instance.

    Deterministic given (problem, seed, config).  The per-agent outputs are
    kept separate; only test harnesses should assemble a global assignment.
    """
    if name not in SOLVERS:
        raise KeyError(f"unknown solver {name!r}; known: {sorted(SOLVERS)}")
    spec = SOLVERS[name]
    config = config or RunConfig()
    if not problem.is_connected() and len(problem.variables) > 1:
        raise ValueError("solvers require a single constraint-graph component")
    pad = spec.pad_default if config.pad is None else config.pad
    run_problem = problem
    if pad:
        size = max(len(problem.domains[x]) for x in problem.variables)
        run_problem = pad_domains(problem, size)
    sim = Sim(run_problem, seed, config)
    for proc in spec.factory(run_problem, sim, config).values():
        sim.add_process(proc)
    results = sim.run(config.timeout_secs)

    per_agent: dict = {}
    feasible = None
    min_violations = None
    iterations = sim.metrics.stats.get("iterations", 1)
    for x, r in results.items():
        if "value" in r:
            per_agent.setdefault(run_problem.owner[x], {})[x] = r["value"]
        if "feasible" in r:
            feasible = r["feasible"]
        if r.get("min_violations") is not None:
            min_violations = r["min_violations"]
    debug = {x: r for x, r in results.items()} if config.debug else {}
    return RunResult(
        solver=name, feasible=feasible, per_agent=per_agent,
        metrics=sim.metrics, transcript=sim.transcript,
        iterations=iterations, min_violations=min_violations, debug=debug,
    )
