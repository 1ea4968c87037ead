"""Baseline DPOP over a pseudo-tree.

Bottom-up FEAS propagation of violation counts (min-sum dynamic
programming) followed by top-down DECISION propagation.  Payloads travel in
cleartext; this is the non-private control the privacy-aware solvers are
measured against.
"""

from __future__ import annotations

from .kernel import KernelProcess, PseudoTreeView
from .model import Constraint, Problem
from .runtime import RunConfig, Sim
from .solvers import register_solver
from .tables import Axis, FeasTable, join, project_min, zero_table


def constraint_table(c: Constraint) -> FeasTable:
    """The constraint's cost table as a FeasTable over its scope."""
    axes = [Axis(x, dom) for x, dom in zip(c.scope, c.domains)]
    return FeasTable(axes, list(c.table))


def eligible_constraints(constraints, view: PseudoTreeView):
    """Constraints joined locally at this variable: those involving it and
    no (pseudo-)children, so each constraint enters the propagation exactly
    once, at its deepest scope variable."""
    below = set(view.children) | set(view.pseudo_children)
    return [c for c in constraints
            if view.variable in c.scope and not (set(c.scope) & below)]


def local_join(problem: Problem, view: PseudoTreeView,
               extra: tuple[Constraint, ...] = ()) -> FeasTable:
    x = view.variable
    t = zero_table(x, problem.domains[x])
    for c in eligible_constraints(list(problem.constraints) + list(extra), view):
        t = join(t, constraint_table(c))
    return t


def table_to_payload(t: FeasTable) -> dict:
    return {"table": t.canonical()}


def table_from_payload(payload: dict) -> FeasTable:
    from .crypto import Cyphertext
    struct = payload["table"]
    axes = [Axis(ax["label"], tuple(ax["values"])) for ax in struct["scope"]]
    entries = [Cyphertext(e["alpha"], e["beta"])
               if isinstance(e, dict) else e
               for e in struct["entries"]]
    return FeasTable(axes, entries)


def assignment_to_pairs(assignment: dict) -> list:
    return [[k, v] for k, v in assignment.items()]


def assignment_from_pairs(pairs) -> dict:
    return {(k if not isinstance(k, list) else tuple(k)): v for k, v in pairs}


class DpopProcess(KernelProcess):
    """DPOP state machine for one variable."""

    def __init__(self, var: str, sim: Sim, preset_views=None, order_hint=None):
        super().__init__(var, sim, order_hint)
        self.preset_views = preset_views

    def main(self):
        if self.preset_views is not None:
            view = self.preset_views[self.var]
            self.views[0] = view
            is_root = view.is_root
        else:
            rounds = (self.sim.config.election_rounds
                      or len(self.sim.problem.variables))
            is_root = yield from self.elect_root(rounds)
            view = yield from self.build_tree(0, is_root)
        result = yield from self.propagate(view)
        return result

    def propagate(self, view: PseudoTreeView):
        x = self.var
        problem = self.sim.problem
        m = local_join(problem, view)
        yield from self.charge(m.size())
        seps: dict[str, list] = {}
        for c in view.children:
            msg = yield from self.get(
                lambda msg, c=c: msg.type == "FEAS" and msg.sender == c)
            t = table_from_payload(msg.payload)
            seps[c] = t.labels()
            m = join(m, t)
            yield from self.charge(m.size())

        decided: dict = {}
        if not is_root_view(view):
            m_out, best = project_min(m, x)
            yield from self.charge(m.size())
            self.sim.log_logical("FEAS", sep=len(m_out.scope))
            yield from self.send(view.parent, "FEAS", table_to_payload(m_out))
            dm = yield from self.get(
                lambda msg: msg.type == "DECISION" and msg.sender == view.parent)
            decided = assignment_from_pairs(dm.payload["assignment"])
            my_value = best.lookup(decided)
            feasible = None
            min_count = None
        else:
            final, best = project_min(m, x)
            yield from self.charge(m.size())
            min_count = final.entries[0]
            my_value = best.choices[0]
            feasible = min_count == 0
        decided[x] = my_value

        for c in view.children:
            payload = {v: decided[v] for v in seps[c]}
            self.sim.log_logical("DECISION")
            yield from self.send(c, "DECISION",
                                 {"assignment": assignment_to_pairs(payload)})
        out = {"value": my_value}
        if feasible is not None:
            out.update({"feasible": feasible, "min_violations": min_count,
                        "root": True})
        if self.sim.config.debug:
            out["view"] = view
        return out


def is_root_view(view: PseudoTreeView) -> bool:
    return view.is_root


def make_processes(problem: Problem, sim: Sim, config: RunConfig,
                   preset_views=None, order_hint=None):
    return {x: DpopProcess(x, sim, preset_views, order_hint)
            for x in problem.variables}


register_solver("dpop", make_processes, pad_default=False)


def solve(problem: Problem, views: dict[str, PseudoTreeView], seed: int = 0,
          config: RunConfig | None = None):
    """Run DPOP on a pre-built pseudo-tree.

    Returns (assignment, min_violations, metrics, transcript).
    """
    config = config or RunConfig()
    sim = Sim(problem, seed, config)
    for x in problem.variables:
        sim.add_process(DpopProcess(x, sim, preset_views=views))
    results = sim.run(config.timeout_secs)
    assignment = {x: r["value"] for x, r in results.items()}
    min_count = next(r["min_violations"] for r in results.values()
                     if r.get("root"))
    return assignment, min_count, sim.metrics, sim.transcript
