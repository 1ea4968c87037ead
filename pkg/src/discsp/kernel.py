"""Distributed structural protocols shared by every solver.

Four pieces: root election by score flooding, token-passing DFS pseudo-tree
construction, unique variable-ID assignment with secret random increments,
and circular message routing over the pseudo-tree (PREV/LAST envelopes).

Each routed envelope carries the epoch (index) of the pseudo-tree it rides,
so ring traffic from an earlier tree can keep flowing while a later tree is
still under construction; every variable retains its view of each epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Problem
from .runtime import Msg, Process, RunConfig, Sim


class KernelError(RuntimeError):
    pass


@dataclass(frozen=True)
class PseudoTreeView:
    """One variable's local view of the pseudo-tree."""

    variable: str
    parent: "str | None"
    pseudo_parents: tuple[str, ...]
    children: tuple[str, ...]
    pseudo_children: tuple[str, ...]
    is_root: bool

    def ancestors_here(self) -> tuple[str, ...]:
        out = () if self.parent is None else (self.parent,)
        return out + self.pseudo_parents

    def validate(self, problem: Problem):
        neighbors = set(problem.neighbor_vars(self.variable))
        for y in self.ancestors_here() + self.children + self.pseudo_children:
            if y not in neighbors:
                raise KernelError(f"{self.variable}: {y} is not a constraint-graph neighbor")
        if set(self.children) & set(self.pseudo_children):
            raise KernelError(f"{self.variable}: child and pseudo-child overlap")
        if self.is_root != (self.parent is None):
            raise KernelError(f"{self.variable}: root flag disagrees with parent")


@dataclass(frozen=True)
class IdAssignment:
    id: int
    next_bound: int   # tight strict lower bound on the next unique ID
    total_bound: int  # upper bound on the variable count
    incr_min: int

    def validate(self):
        if not (self.id <= self.next_bound < self.total_bound):
            raise KernelError("id bounds violated")


# ------------------------------------------------------- pure routing rules

def to_previous_hop(view: PseudoTreeView) -> tuple[str, str]:
    """First hop for a message addressed to the previous variable.

    Returns (kind, destination).  A root without children is alone in the
    ring and addresses itself.
    """
    if view.is_root:
        if not view.children:
            return ("LAST", view.variable)
        return ("LAST", view.children[-1])
    return ("PREV", view.parent)


def route_hop(view: PseudoTreeView, kind: str, sender: "str | None"):
    """Routing decision on receipt: ("deliver",) or ("forward", kind, dst)."""
    if kind == "LAST":
        if not view.children:
            return ("deliver",)
        return ("forward", "LAST", view.children[-1])
    if kind == "PREV":
        if not view.children or sender not in view.children:
            raise KernelError(
                f"{view.variable}: PREV from {sender} which is not a child")
        i = view.children.index(sender)
        if i == 0:
            return ("deliver",)
        return ("forward", "LAST", view.children[i - 1])
    raise KernelError(f"unknown envelope kind {kind}")


def circular_order(views: dict[str, PseudoTreeView]) -> list[str]:
    """DFS preorder (the counter-clock-wise circular order)."""
    roots = [v for v, w in views.items() if w.is_root]
    if len(roots) != 1:
        raise KernelError(f"expected one root, found {roots}")
    order = []

    def visit(x):
        order.append(x)
        for c in views[x].children:
            visit(c)

    visit(roots[0])
    return order


def tree_from_parents(problem: Problem, parents: dict,
                      children_order: dict | None = None) -> dict[str, PseudoTreeView]:
    """Build views from an explicit tree (fixture helper).

    `parents` maps each variable to its parent (None for the root); children
    lists follow `children_order` when given, else sorted order.  Non-tree
    constraint edges must connect ancestors to descendants (DFS property).
    """
    roots = [x for x, p in parents.items() if p is None]
    if len(roots) != 1:
        raise KernelError(f"need exactly one root, got {roots}")
    children: dict[str, list] = {x: [] for x in parents}
    for x, p in parents.items():
        if p is not None:
            children[p].append(x)
    if children_order:
        for x, order in children_order.items():
            if sorted(order) != sorted(children[x]):
                raise KernelError(f"children order for {x} does not match tree")
            children[x] = list(order)
    else:
        for x in children:
            children[x].sort()

    def ancestors(x):
        out = []
        while parents[x] is not None:
            x = parents[x]
            out.append(x)
        return out

    pseudo_parents: dict[str, list] = {x: [] for x in parents}
    pseudo_children: dict[str, list] = {x: [] for x in parents}
    for a, b in sorted(problem.edges()):
        if parents.get(a) == b or parents.get(b) == a:
            continue
        if b in ancestors(a):
            lo, hi = a, b
        elif a in ancestors(b):
            lo, hi = b, a
        else:
            raise KernelError(f"edge {a}-{b} is not ancestor-descendant")
        pseudo_parents[lo].append(hi)
        pseudo_children[hi].append(lo)
    views = {}
    for x in parents:
        views[x] = PseudoTreeView(
            variable=x, parent=parents[x],
            pseudo_parents=tuple(sorted(pseudo_parents[x])),
            children=tuple(children[x]),
            pseudo_children=tuple(sorted(pseudo_children[x])),
            is_root=parents[x] is None,
        )
        views[x].validate(problem)
    return views


# --------------------------------------------------------- kernel processes

class KernelProcess(Process):
    """Process base with the structural phases and routing intercepts."""

    def __init__(self, var: str, sim: Sim, order_hint: dict | None = None):
        super().__init__(var, sim)
        p = sim.problem
        self.neighbors = sorted(p.neighbor_vars(var))
        self.views: dict[int, PseudoTreeView] = {}
        self.dfs_epoch = -1
        self._dfs_visited = False
        self._dfs_parent = None
        self._dfs_children: list[str] = []
        self._dfs_pp: set[str] = set()
        self._dfs_pc: set[str] = set()
        self.ids: IdAssignment | None = None
        self.order_hint = order_hint or {}

    # -- routing -------------------------------------------------------------

    def route_to_previous(self, epoch: int, inner_type: str, inner_payload: dict,
                          sep: int | None = None, log: bool = True):
        """Send a logical message to the previous variable in the circular
        order of the given tree epoch.  `log=False` marks a forwarding hop
        rather than a fresh logical send."""
        view = self.views[epoch]
        kind, dst = to_previous_hop(view)
        if log:
            self.sim.log_logical(inner_type, sep)
        yield from self.send(dst, kind, {
            "epoch": epoch, "inner_type": inner_type, "inner": inner_payload,
        })

    def intercept(self, msg: Msg, arrivals: list):
        if msg.type in ("PREV", "LAST"):
            epoch = msg.payload["epoch"]
            view = self.views.get(epoch)
            if view is None:
                raise KernelError(
                    f"{self.var}: routed envelope for unknown epoch {epoch}")
            decision = route_hop(view, msg.type, msg.sender)
            if decision[0] == "deliver":
                arrivals.append(Msg(msg.payload["inner_type"],
                                    dict(msg.payload["inner"]), sender=None))
            else:
                _, kind, dst = decision
                yield from self.send(dst, kind, dict(msg.payload))
            return True
        if msg.type == "TOKEN" and msg.payload.get("kind") == "visit":
            if msg.payload["epoch"] == self.dfs_epoch and self._dfs_visited:
                if self.dfs_epoch in self.views:
                    # A completed variable can never be probed again (all its
                    # incident edges were classified before it returned).
                    raise KernelError(
                        f"{self.var}: probe after DFS completion (epoch "
                        f"{self.dfs_epoch})")
                self._dfs_pc.add(msg.sender)
                yield from self.send(msg.sender, "TOKEN", {
                    "kind": "bounce", "epoch": self.dfs_epoch,
                })
                return True
        return False

    # -- root election ---------------------------------------------------------

    def elect_root(self, rounds: int):
        """Synchronous max-score flooding; returns True iff this variable wins."""
        rng = self.sim.rng(self.var, "election")
        my_score = rng.getrandbits(128)
        best = my_score
        for r in range(1, rounds + 1):
            for u in self.neighbors:
                yield from self.send(u, "SCORE", {"round": r, "score": best})
            for u in self.neighbors:
                m = yield from self.get(
                    lambda m, u=u, r=r: m.type == "SCORE" and m.sender == u
                    and m.payload["round"] == r)
                best = max(best, m.payload["score"])
            yield from self.charge(1)
        return best == my_score

    # -- DFS construction -------------------------------------------------------

    def _probe_order(self, epoch: int) -> list[str]:
        hint = self.order_hint.get(self.var)
        if hint:
            return [u for u in hint if u in self.neighbors]
        order = list(self.neighbors)
        self.sim.rng(self.var, "dfs", epoch).shuffle(order)
        return order

    def build_tree(self, epoch: int, is_root: bool):
        """Token-passing DFS; fills self.views[epoch] with this variable's view.

        Revisits are discovered by probing: a probe to an already-visited
        neighbor bounces, classifying the edge as a back-edge whose root is
        the bouncing (ancestor) side.
        """
        self.dfs_epoch = epoch
        self._dfs_visited = False
        self._dfs_parent = None
        self._dfs_children = []
        self._dfs_pp = set()
        self._dfs_pc = set()
        if is_root:
            self._dfs_visited = True
        else:
            m = yield from self.get(
                lambda m: m.type == "TOKEN" and m.payload.get("kind") == "visit"
                and m.payload["epoch"] == epoch)
            self._dfs_visited = True
            self._dfs_parent = m.sender
        for u in self._probe_order(epoch):
            if (u == self._dfs_parent or u in self._dfs_children
                    or u in self._dfs_pp or u in self._dfs_pc):
                continue
            yield from self.send(u, "TOKEN", {"kind": "visit", "epoch": epoch})
            m = yield from self.get(
                lambda m, u=u: m.type == "TOKEN" and m.sender == u
                and m.payload.get("kind") in ("return", "bounce")
                and m.payload["epoch"] == epoch)
            if m.payload["kind"] == "bounce":
                self._dfs_pp.add(u)
            else:
                self._dfs_children.append(u)
        if not is_root:
            yield from self.send(self._dfs_parent, "TOKEN",
                                 {"kind": "return", "epoch": epoch})
        self.views[epoch] = PseudoTreeView(
            variable=self.var, parent=self._dfs_parent,
            pseudo_parents=tuple(sorted(self._dfs_pp)),
            children=tuple(self._dfs_children),
            pseudo_children=tuple(sorted(self._dfs_pc)),
            is_root=is_root,
        )
        return self.views[epoch]

    # -- unique IDs ---------------------------------------------------------------

    def assign_ids(self, epoch: int, incr_min: int):
        """DFS-order counter with secret random increments; root broadcasts
        the final counter as the bound n+."""
        view = self.views[epoch]
        rng = self.sim.rng(self.var, "ids")
        if view.is_root:
            counter = 0
        else:
            m = yield from self.get(
                lambda m: m.type == "IDS" and m.payload.get("kind") == "assign"
                and m.sender == view.parent)
            counter = m.payload["counter"]
        my_id = counter
        counter += 1 + rng.randint(0, 2 * incr_min)
        next_bound = counter - 1
        for c in view.children:
            yield from self.send(c, "IDS", {"kind": "assign", "counter": counter})
            m = yield from self.get(
                lambda m, c=c: m.type == "IDS" and m.payload.get("kind") == "return"
                and m.sender == c)
            counter = m.payload["counter"]
        if view.is_root:
            total = counter
        else:
            yield from self.send(view.parent, "IDS",
                                 {"kind": "return", "counter": counter})
            m = yield from self.get(
                lambda m: m.type == "IDS" and m.payload.get("kind") == "total"
                and m.sender == view.parent)
            total = m.payload["total"]
        for c in view.children:
            yield from self.send(c, "IDS", {"kind": "total", "total": total})
        self.ids = IdAssignment(id=my_id, next_bound=next_bound,
                                total_bound=total, incr_min=incr_min)
        self.ids.validate()
        return self.ids


# ------------------------------------------------ standalone kernel drivers

class _PhaseProcess(KernelProcess):
    """Runs a configurable sequence of kernel phases (for unit use)."""

    def __init__(self, var, sim, phases, order_hint=None, root=None,
                 incr_min=10):
        super().__init__(var, sim, order_hint)
        self.phases = phases
        self.preset_root = root
        self.incr_min = incr_min

    def main(self):
        out = {}
        is_root = False
        for phase in self.phases:
            if phase == "elect":
                rounds = (self.sim.config.election_rounds
                          or len(self.sim.problem.variables))
                is_root = yield from self.elect_root(rounds)
                out["is_root"] = is_root
                out["converged"] = True
            elif phase == "dfs":
                if self.preset_root is not None:
                    is_root = self.var == self.preset_root
                view = yield from self.build_tree(0, is_root)
                out["view"] = view
            elif phase == "ids":
                ids = yield from self.assign_ids(0, self.incr_min)
                out["ids"] = ids
        return out


def _run_phases(problem: Problem, seed: int, phases, order_hint=None,
                root=None, incr_min=10, config: RunConfig | None = None):
    sim = Sim(problem, seed, config or RunConfig())
    for x in problem.variables:
        sim.add_process(_PhaseProcess(x, sim, phases, order_hint, root, incr_min))
    results = sim.run()
    return results, sim


def elect_root(problem: Problem, seed: int, rounds: int | None = None):
    """Distributed election; returns ({var: is_root}, converged)."""
    cfg = RunConfig(election_rounds=rounds)
    results, _ = _run_phases(problem, seed, ["elect"], config=cfg)
    return {x: r["is_root"] for x, r in results.items()}, True


def build_dfs_tree(problem: Problem, root: str, seed: int,
                   order_hint: dict | None = None) -> dict[str, PseudoTreeView]:
    """Distributed DFS from a given root; returns all local views."""
    results, _ = _run_phases(problem, seed, ["dfs"], order_hint, root)
    return {x: r["view"] for x, r in results.items()}


def assign_unique_ids(problem: Problem, root: str, seed: int,
                      incr_min: int = 10, order_hint: dict | None = None):
    """DFS + ID assignment; returns ({var: IdAssignment}, {var: view})."""
    results, _ = _run_phases(problem, seed, ["dfs", "ids"], order_hint, root,
                             incr_min)
    return ({x: r["ids"] for x, r in results.items()},
            {x: r["view"] for x, r in results.items()})
