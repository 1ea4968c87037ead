import itertools

import pytest

from discsp.model import (Constraint, ModelError, Problem, decompose_shared_constraint,
                          evaluate, pad_domains, to_max_discsp)
from discsp.oracle import brute_force

RGB = ("R", "B", "G")


def tiny_problem(constraints, domains=None, n=2):
    variables = tuple(f"x{i}" for i in range(1, n + 1))
    agents = tuple(f"a{i}" for i in range(1, n + 1))
    owner = {f"x{i}": f"a{i}" for i in range(1, n + 1)}
    domains = domains or {x: RGB for x in variables}
    return Problem(agents, variables, owner, domains, constraints)


def test_evaluate_figure1_solution(fig1):
    assert evaluate(fig1, {"x1": "B", "x2": "R", "x3": "B", "x4": "G",
                           "x5": "G"}) == 0


def test_evaluate_figure1_all_red(fig1):
    assert evaluate(fig1, {x: "R" for x in fig1.variables}) == 7


def test_evaluate_empty_conjunction():
    p = tiny_problem(())
    assert evaluate(p, {"x1": "R", "x2": "G"}) == 0


def test_evaluate_incomplete_assignment(fig1):
    with pytest.raises(ModelError):
        evaluate(fig1, {"x1": "R"})


def test_evaluate_out_of_domain(fig1):
    bad = {x: "R" for x in fig1.variables}
    bad["x3"] = "PURPLE"
    with pytest.raises(ModelError):
        evaluate(fig1, bad)


def test_max_discsp_unary_recast(fig1):
    recast = to_max_discsp(fig1)
    u5 = next(c for c in recast.constraints if c.name == "u_x5")
    assert u5.cost(("B",)) == 1
    assert u5.cost(("G",)) == 0


def test_max_discsp_binary_recast():
    c = Constraint.from_predicate(("x1", "x2"), (RGB, RGB),
                                  lambda a, b: a != b, {"a1", "a2"})
    assert c.cost(("R", "R")) == 1
    assert c.cost(("R", "G")) == 0


def test_evaluate_equals_cost_sum_exhaustive(fig1):
    recast = to_max_discsp(fig1)
    small = [c for c in fig1.constraints]
    for values in itertools.product(RGB, repeat=5):
        a = dict(zip(fig1.variables, values))
        total = sum(c.cost(tuple(a[x] for x in c.scope)) for c in recast.constraints)
        assert evaluate(fig1, a) == total
    assert len(small) == 8


def test_visibility_invariant(fig1):
    fig1.check_visibility()
    bad = Constraint.from_predicate(("x1",), (RGB,), lambda v: True,
                                    {"a1", "a9"})
    p = Problem(fig1.agents, fig1.variables, dict(fig1.owner),
                dict(fig1.domains), fig1.constraints[:1] + (bad,))
    with pytest.raises(ModelError):
        p.check_visibility()


def test_constraint_graph_edges(fig1):
    assert ("x1", "x2") in fig1.edges()
    assert ("x2", "x5") not in fig1.edges()
    assert fig1.is_connected()


# -- decomposition -------------------------------------------------------------

def test_decompose_unary_pkc_two_agents():
    c = Constraint.from_predicate(("x1",), (RGB,), lambda v: v != "R",
                                  {"a1", "a2"}, name="pkc")
    cons, new_vars = decompose_shared_constraint(c, {"x1": "a1"})
    # a1 keeps its own variable, a2 constrains a copy tied back by equality.
    assert set(new_vars) == {"x1__a2"}
    assert new_vars["x1__a2"][0] == "a2"
    privates = [k for k in cons if len(k.scope) == 1]
    equalities = [k for k in cons if len(k.scope) == 2]
    assert len(privates) == 2 and len(equalities) == 1
    assert all(len(k.visibility) == 1 for k in privates)


def test_decompose_single_agent_unchanged():
    c = Constraint.from_predicate(("x1",), (RGB,), lambda v: v != "R", {"a1"})
    cons, new_vars = decompose_shared_constraint(c, {"x1": "a1"})
    assert cons == [c] and new_vars == {}


def test_decompose_preserves_solutions():
    c = Constraint.from_predicate(("x1", "x2"), (RGB, RGB),
                                  lambda a, b: a != b, {"a1", "a2"}, name="ne")
    base = tiny_problem((c,))
    cons, new_vars = decompose_shared_constraint(c, dict(base.owner))
    variables = base.variables + tuple(sorted(new_vars))
    owner = dict(base.owner)
    domains = dict(base.domains)
    agents = set(base.agents)
    for v, (ag, dom) in new_vars.items():
        owner[v] = ag
        domains[v] = dom
        agents.add(ag)
    decomposed = Problem(tuple(sorted(agents)), variables, owner, domains,
                         tuple(cons))
    originals = {}
    for values in itertools.product(RGB, RGB):
        originals[values] = c.cost(values) == 0
    projected = set()
    for values in itertools.product(*(domains[x] for x in variables)):
        a = dict(zip(variables, values))
        if evaluate(decomposed, a) == 0:
            projected.add((a["x1"], a["x2"]))
    assert projected == {v for v, ok in originals.items() if ok}


def test_decompose_resource_copy_shape():
    # A resource variable x_b shared with a bidder introduces one copy b_x
    # and an equality tying them.
    c = Constraint.from_predicate(("x_b",), ((0, 1),), lambda v: v <= 1,
                                  {"airport", "airline"})
    cons, new_vars = decompose_shared_constraint(c, {"x_b": "airport"})
    assert list(new_vars) == ["x_b__airline"]
    eqs = [k for k in cons if len(k.scope) == 2]
    assert eqs and eqs[0].cost((0, 1)) == 1 and eqs[0].cost((1, 1)) == 0


# -- padding --------------------------------------------------------------------

def test_pad_domains_sizes():
    domains = {"x1": ("R", "B"), "x2": RGB, "x3": RGB}
    variables = ("x1", "x2", "x3")
    agents = ("a1", "a2", "a3")
    owner = {"x1": "a1", "x2": "a2", "x3": "a3"}
    c = Constraint.from_predicate(("x1", "x2"), (domains["x1"], RGB),
                                  lambda a, b: a != b, {"a1", "a2"})
    p = Problem(agents, variables, owner, domains, (c,))
    padded = pad_domains(p, 3)
    assert all(len(padded.domains[x]) == 3 for x in variables)
    pads = [c for c in padded.constraints if c.name.startswith("pad_")]
    assert len(pads) == 1  # only x1 needed a fake value


def test_pad_domains_uniform_noop(fig1):
    assert pad_domains(fig1, 3) is fig1


def test_pad_domains_too_small(fig1):
    with pytest.raises(ModelError):
        pad_domains(fig1, 2)


def test_pad_preserves_solution_set():
    domains = {"x1": ("R", "B"), "x2": RGB}
    owner = {"x1": "a1", "x2": "a2"}
    c = Constraint.from_predicate(("x1", "x2"), (domains["x1"], RGB),
                                  lambda a, b: a != b, {"a1", "a2"})
    p = Problem(("a1", "a2"), ("x1", "x2"), owner, domains, (c,))
    padded = pad_domains(p, 4)
    base = brute_force(p)
    solutions = set()
    for values in itertools.product(*(padded.domains[x] for x in padded.variables)):
        a = dict(zip(padded.variables, values))
        if evaluate(padded, a) == 0:
            solutions.add(values)
    real = {v for v in solutions
            if all(not (isinstance(t, str) and t.startswith("!pad")) for t in v)}
    assert real == solutions  # padded values never appear in solutions
    assert len(real) == base.solution_count
