"""Problem model: agents, variables, finite domains, and extensional constraints.

Constraints are stored extensionally as dense cost tables over the scope's
Cartesian product, with costs in {0, 1} (0 = feasible, 1 = infeasible).
Intensional predicates are tabulated at construction time, which is what the
dynamic-programming solvers need anyway.  Values are opaque tokens (str or
int) with a stable total order given by their position in the domain list.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

Value = "str | int"


class ModelError(ValueError):
    """Raised for malformed problems, constraints or assignments."""


def _product_size(sizes):
    n = 1
    for s in sizes:
        n *= s
    return n


@dataclass(frozen=True)
class Constraint:
    """An extensional constraint over an ordered scope of variables.

    `table` holds one cost per tuple of the scope's Cartesian product in
    row-major order (last scope variable varies fastest).  Costs are 0 for
    feasible tuples and 1 for infeasible ones.  `visibility` is the set of
    agents that know the constraint; the standard assumption is that this
    equals the owners of the scope variables.
    """

    scope: tuple[str, ...]
    domains: tuple[tuple, ...]  # domain (value tuple) per scope variable
    table: tuple[int, ...]
    visibility: frozenset[str] = frozenset()
    name: str = ""

    def __post_init__(self):
        if not self.scope:
            raise ModelError("constraint scope must be non-empty")
        if len(set(self.scope)) != len(self.scope):
            raise ModelError(f"duplicate variable in scope {self.scope}")
        if len(self.domains) != len(self.scope):
            raise ModelError("one domain required per scope variable")
        if len(self.table) != _product_size(len(d) for d in self.domains):
            raise ModelError("table size does not match scope product")
        if any(c not in (0, 1) for c in self.table):
            raise ModelError("constraint costs must be 0 or 1")

    @classmethod
    def from_predicate(cls, scope, domains, predicate, visibility=(), name=""):
        """Tabulate `predicate(*values) -> bool` (True = feasible)."""
        domains = tuple(tuple(d) for d in domains)
        table = tuple(
            0 if predicate(*values) else 1
            for values in itertools.product(*domains)
        )
        return cls(tuple(scope), domains, table, frozenset(visibility), name)

    @classmethod
    def from_forbidden(cls, scope, domains, forbidden, visibility=(), name=""):
        forbidden = {tuple(t) for t in forbidden}
        return cls.from_predicate(
            scope, domains, lambda *v: v not in forbidden, visibility, name
        )

    @classmethod
    def from_allowed(cls, scope, domains, allowed, visibility=(), name=""):
        allowed = {tuple(t) for t in allowed}
        return cls.from_predicate(
            scope, domains, lambda *v: v in allowed, visibility, name
        )

    def index_of(self, values):
        idx = 0
        for dom, v in zip(self.domains, values):
            try:
                pos = dom.index(v)
            except ValueError:
                raise ModelError(f"value {v!r} outside domain {dom}") from None
            idx = idx * len(dom) + pos
        return idx

    def cost(self, values) -> int:
        """0 if the tuple is feasible, 1 otherwise."""
        return self.table[self.index_of(values)]

    def is_feasible(self, values) -> bool:
        return self.cost(values) == 0


@dataclass(frozen=True)
class Problem:
    """A DisCSP: agents, owned variables, finite domains, constraints."""

    agents: tuple[str, ...]
    variables: tuple[str, ...]
    owner: dict[str, str] = field(default_factory=dict)
    domains: dict[str, tuple] = field(default_factory=dict)
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "domains", {v: tuple(d) for v, d in self.domains.items()})
        object.__setattr__(self, "constraints", tuple(self.constraints))
        self.validate()

    def validate(self):
        agents = set(self.agents)
        variables = set(self.variables)
        if len(variables) != len(self.variables):
            raise ModelError("duplicate variable names")
        for x in self.variables:
            if x not in self.owner:
                raise ModelError(f"variable {x} has no owner")
            if self.owner[x] not in agents:
                raise ModelError(f"owner of {x} is not a declared agent")
            if not self.domains.get(x):
                raise ModelError(f"variable {x} has an empty or missing domain")
            if len(set(self.domains[x])) != len(self.domains[x]):
                raise ModelError(f"domain of {x} has duplicate values")
        for c in self.constraints:
            for x, dom in zip(c.scope, c.domains):
                if x not in variables:
                    raise ModelError(f"constraint scope variable {x} unknown")
                if tuple(dom) != self.domains[x]:
                    raise ModelError(f"constraint domain for {x} disagrees with problem")

    def check_visibility(self):
        """Standard assumption 3: a constraint is visible exactly to the owners
        of its scope variables."""
        for c in self.constraints:
            owners = frozenset(self.owner[x] for x in c.scope)
            if c.visibility != owners:
                raise ModelError(
                    f"constraint {c.name or c.scope} visibility {set(c.visibility)} "
                    f"!= scope owners {set(owners)}"
                )

    def neighbor_vars(self, x: str) -> tuple[str, ...]:
        """Variables sharing a constraint scope with x, sorted."""
        out = set()
        for c in self.constraints:
            if x in c.scope:
                out.update(c.scope)
        out.discard(x)
        return tuple(sorted(out))

    def edges(self) -> set[tuple[str, str]]:
        """Constraint-graph edges: pairs co-occurring in some scope."""
        out = set()
        for c in self.constraints:
            for a, b in itertools.combinations(sorted(c.scope), 2):
                out.add((a, b))
        return out

    def agent_neighbors(self, agent: str) -> set[str]:
        """Agents sharing at least one constraint with `agent`."""
        out = set()
        for c in self.constraints:
            owners = {self.owner[x] for x in c.scope}
            if agent in owners:
                out.update(owners)
        out.discard(agent)
        return out

    def components(self) -> list[set[str]]:
        adj = {x: set() for x in self.variables}
        for a, b in self.edges():
            adj[a].add(b)
            adj[b].add(a)
        seen, comps = set(), []
        for x in self.variables:
            if x in seen:
                continue
            comp, stack = set(), [x]
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                stack.extend(adj[v] - comp)
            seen |= comp
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def state_space_size(self) -> int:
        return _product_size(len(self.domains[x]) for x in self.variables)


# Assignments are plain dicts {variable: value}.

def check_assignment(problem: Problem, assignment: dict) -> None:
    for x in problem.variables:
        if x not in assignment:
            raise ModelError(f"assignment incomplete: {x} unbound")
        if assignment[x] not in problem.domains[x]:
            raise ModelError(f"value {assignment[x]!r} outside domain of {x}")


def evaluate(problem: Problem, assignment: dict) -> int:
    """Number of violated constraints under a complete assignment.

    0 iff the assignment is a solution.
    """
    check_assignment(problem, assignment)
    return sum(
        c.cost(tuple(assignment[x] for x in c.scope)) for c in problem.constraints
    )


def to_max_discsp(problem: Problem) -> Problem:
    """Recast boolean constraints as {0,1}-valued cost tables.

    Constraints are already stored as 0/1 cost tables, so the recast is a
    structural copy; it exists so callers can state the reformulation
    explicitly.  evaluate() over the result equals the violation count.
    """
    return replace(problem)


def decompose_shared_constraint(c: Constraint, owner: dict[str, str]):
    """Split a constraint known to k agents into k private constraints over
    fresh copy variables, plus equality constraints tying copies to originals.

    Returns (constraints, new_variables) where new_variables maps each fresh
    copy variable to (owner_agent, domain).  A constraint known to a single
    agent is returned unchanged.
    """
    agents = sorted(c.visibility)
    if not agents:
        raise ModelError("constraint has no knowing agent")
    if len(agents) == 1:
        return [c], {}

    new_vars: dict[str, tuple] = {}
    out: list[Constraint] = []
    for agent in agents:
        copies = []
        for x, dom in zip(c.scope, c.domains):
            if owner.get(x) == agent:
                copies.append(x)  # own variables need no copy
                continue
            cx = f"{x}__{agent}"
            if cx in new_vars:
                raise ModelError(f"copy variable {cx} already exists")
            new_vars[cx] = (agent, tuple(dom))
            copies.append(cx)
        out.append(
            Constraint(tuple(copies), c.domains, c.table, frozenset({agent}),
                       name=f"{c.name or 'c'}@{agent}")
        )
        for x, cx, dom in zip(c.scope, copies, c.domains):
            if cx == x:
                continue
            out.append(Constraint.from_predicate(
                (cx, x), (dom, dom), lambda a, b: a == b,
                visibility={agent, owner[x]}, name=f"eq_{cx}",
            ))
    return out, new_vars


PAD_PREFIX = "!pad"


def pad_domains(problem: Problem, size: int) -> Problem:
    """Pad every domain to `size` values with fake, always-infeasible tokens.

    Each padded variable gains a private unary constraint forbidding its fake
    values, so the solution set projected onto real values is unchanged.
    Domains already at `size` are left untouched.
    """
    max_dom = max(len(problem.domains[x]) for x in problem.variables)
    if size < max_dom:
        raise ModelError(f"pad size {size} below largest domain {max_dom}")
    domains = dict(problem.domains)
    extra: list[Constraint] = []
    for x in problem.variables:
        dom = list(domains[x])
        missing = size - len(dom)
        if missing == 0:
            continue
        fakes = []
        i = 0
        while len(fakes) < missing:
            token = f"{PAD_PREFIX}{i}"
            if token not in dom:
                fakes.append(token)
            i += 1
        dom = dom + fakes
        domains[x] = tuple(dom)
        extra.append(Constraint.from_predicate(
            (x,), (dom,), lambda v: not (isinstance(v, str) and v.startswith(PAD_PREFIX)),
            visibility={problem.owner[x]}, name=f"pad_{x}",
        ))
    if not extra:
        return problem
    # Re-tabulate existing constraints over the padded domains: fake values
    # are infeasible in every constraint they appear in via the unary above,
    # so existing tables only need extending with "don't care" rows.  Keeping
    # them infeasible is simplest and preserves the real-value solution set.
    new_constraints = []
    for c in problem.constraints:
        doms = tuple(domains[x] for x in c.scope)
        if doms == c.domains:
            new_constraints.append(c)
            continue

        def padded_cost(*values, _c=c):
            if any(isinstance(v, str) and v.startswith(PAD_PREFIX) for v in values):
                return False
            return _c.cost(values) == 0

        new_constraints.append(Constraint.from_predicate(
            c.scope, doms, padded_cost, c.visibility, c.name
        ))
    return Problem(problem.agents, problem.variables, dict(problem.owner),
                   domains, tuple(new_constraints) + tuple(extra))
