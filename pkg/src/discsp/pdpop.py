"""P-DPOP and P-DPOP+: privacy-aware DPOP via codenames and obfuscation.

Variable names and domain values crossing back-edges are replaced by large
random codenames generated by the back-edge root and resolved only when the
propagation reaches it again.  Feasibility values are obfuscated two ways:
a single random number added to the positive entries of each local join
(never subtracted, preserving the zero pattern), and per-value obfuscation
keys added at the leaf of each back-edge and subtracted at its root.

The "plus" variant sends a distinct codename package to every
(pseudo-)child, improving topology privacy at the cost of wider separators;
the "minus" variant (plain P-DPOP) reuses one package for all of them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dpop import (assignment_from_pairs, assignment_to_pairs, local_join,
                   table_from_payload, table_to_payload)
from .kernel import KernelProcess, PseudoTreeView
from .model import Constraint, Problem
from .runtime import RunConfig, Sim
from .solvers import register_solver
from .tables import (Axis, FeasTable, add_along_axis, join, map_entries,
                     project_min, relabel_axis, reorder_axis_values,
                     resolve_codename)

CODE_BITS = 128


class PdpopError(RuntimeError):
    pass


@dataclass(frozen=True)
class CodenamePackage:
    """Codename material one variable hands to one (pseudo-)child.

    `domain_codes[i]` encodes the i-th true domain value; `sigma` is the
    secret permutation fixing the order in which the coded values are listed
    on a table axis (so positions leak nothing when domains are public)."""

    var_code: int
    domain_codes: tuple[int, ...]
    sigma: tuple[int, ...]

    def coded_axis_values(self) -> tuple[int, ...]:
        return tuple(self.domain_codes[j] for j in self.sigma)

    def code_of(self, value, domain) -> int:
        return self.domain_codes[list(domain).index(value)]

    def value_of(self, code, domain):
        return list(domain)[self.domain_codes.index(code)]

    def code_to_value(self, domain) -> dict:
        return {c: v for c, v in zip(self.domain_codes, domain)}


def make_codename_package(rng, domain_size: int) -> CodenamePackage:
    codes = []
    seen = set()
    while len(codes) < domain_size:
        c = rng.getrandbits(CODE_BITS)
        if c not in seen:
            seen.add(c)
            codes.append(c)
    sigma = list(range(domain_size))
    rng.shuffle(sigma)
    return CodenamePackage(var_code=rng.getrandbits(CODE_BITS),
                           domain_codes=tuple(codes), sigma=tuple(sigma))


def obfuscate_infeasible(t: FeasTable, r: int) -> FeasTable:
    """Add one positive random number to every positive entry.

    Zero (feasible) entries pass through, so the zero pattern is preserved
    and a solution with no violations stays recognizable."""
    if r < 0:
        raise PdpopError("obfuscation amount must be non-negative")
    return map_entries(t, lambda e: e + r if e > 0 else e)


def apply_key(t: FeasTable, label, amounts: dict, direction: str) -> FeasTable:
    """Add ("add") or subtract ("subtract") a per-value key along one axis."""
    sign = {"add": 1, "subtract": -1}[direction]
    return add_along_axis(t, label, amounts, sign)


class PdpopProcess(KernelProcess):
    """P-DPOP(+) state machine; also the propagation engine reused by the
    rerooted solvers."""

    def __init__(self, var: str, sim: Sim, variant: str = "plus",
                 preset_views=None, order_hint=None):
        super().__init__(var, sim, order_hint)
        if variant not in ("plus", "minus"):
            raise PdpopError(f"unknown variant {variant!r}")
        self.variant = variant
        self.preset_views = preset_views
        self.local_constraints: list[Constraint] = []
        self.sent_packages: dict = {}   # (epoch, recipient) -> package
        self.recv_packages: dict = {}   # (epoch, ancestor) -> package
        self.sent_keys: dict = {}       # (epoch, pseudo_child) -> tuple
        self.recv_keys: dict = {}       # (epoch, pseudo_parent) -> tuple

    # -- codename and key exchange -------------------------------------------

    def exchange_codenames(self, view: PseudoTreeView, epoch: int):
        rng = self.sim.rng(self.var, "codes", epoch)
        domain = self.sim.problem.domains[self.var]
        recipients = list(view.children) + list(view.pseudo_children)
        shared = None
        if self.variant == "minus" and recipients:
            shared = make_codename_package(rng, len(domain))
        for z in recipients:
            pkg = shared if shared is not None else make_codename_package(
                rng, len(domain))
            self.sent_packages[(epoch, z)] = pkg
            self.sim.log_logical("CODES")
            yield from self.send(z, "CODES", {
                "epoch": epoch, "var_code": pkg.var_code,
                "codes": list(pkg.domain_codes), "sigma": list(pkg.sigma),
            })
        for y in view.ancestors_here():
            m = yield from self.get(
                lambda m, y=y: m.type == "CODES" and m.sender == y
                and m.payload["epoch"] == epoch)
            self.recv_packages[(epoch, y)] = CodenamePackage(
                var_code=m.payload["var_code"],
                domain_codes=tuple(m.payload["codes"]),
                sigma=tuple(m.payload["sigma"]),
            )

    def exchange_keys(self, view: PseudoTreeView, epoch: int):
        rng = self.sim.rng(self.var, "keys", epoch)
        b = self.sim.config.b_bits
        domain = self.sim.problem.domains[self.var]
        for z in view.pseudo_children:
            key = tuple(rng.randrange(0, 1 << b) if b else 0 for _ in domain)
            self.sent_keys[(epoch, z)] = key
            self.sim.log_logical("KEY")
            yield from self.send(z, "KEY", {"epoch": epoch, "key": list(key)})
        for y in view.pseudo_parents:
            m = yield from self.get(
                lambda m, y=y: m.type == "KEY" and m.sender == y
                and m.payload["epoch"] == epoch)
            self.recv_keys[(epoch, y)] = tuple(m.payload["key"])

    # -- coded feasibility propagation ----------------------------------------

    def apply_ancestor_codes(self, t: FeasTable, view: PseudoTreeView,
                             epoch: int) -> FeasTable:
        """Swap every (pseudo-)parent axis for its received codename axis,
        listing the coded values in the package's permuted order."""
        problem = self.sim.problem
        for y in view.ancestors_here():
            if y not in t.labels():
                continue
            pkg = self.recv_packages[(epoch, y)]
            coded = tuple(pkg.code_of(v, problem.domains[y])
                          for v in t.scope[t.axis(y)].values)
            t = relabel_axis(t, y, pkg.var_code, coded)
            t = reorder_axis_values(t, pkg.var_code, pkg.coded_axis_values())
        return t

    def coded_local_join(self, view: PseudoTreeView, epoch: int) -> FeasTable:
        t = local_join(self.sim.problem, view, tuple(self.local_constraints))
        return self.apply_ancestor_codes(t, view, epoch)

    def resolve_own_codes(self, t: FeasTable, epoch: int) -> FeasTable:
        domain = self.sim.problem.domains[self.var]
        seen = set()
        for (ep, _z), pkg in list(self.sent_packages.items()):
            if ep != epoch or pkg.var_code in seen:
                continue
            seen.add(pkg.var_code)
            if pkg.var_code in t.labels():
                t = resolve_codename(t, pkg.var_code, self.var,
                                     pkg.code_to_value(domain), domain)
        return t

    def feas_phase(self, view: PseudoTreeView, epoch: int, record_best: bool):
        """Coded, obfuscated bottom-up propagation (shared with the rerooted
        solvers, which skip the argmin recording).

        Returns (feasible, min_count, root_value, best, seps); the first
        three are None at non-root variables."""
        x = self.var
        b = self.sim.config.b_bits
        m = self.coded_local_join(view, epoch)
        yield from self.charge(m.size())
        if b and any(e > 0 for e in m.entries):
            r = self.sim.rng(x, "obf", epoch).randrange(1, 1 << b)
            m = obfuscate_infeasible(m, r)
        seps: dict[str, list] = {}
        for c in view.children:
            msg = yield from self.get(
                lambda msg, c=c: msg.type == "FEAS" and msg.sender == c
                and msg.payload["epoch"] == epoch)
            t = table_from_payload(msg.payload)
            seps[c] = t.labels()
            t = self.resolve_own_codes(t, epoch)
            m = join(m, t)
            yield from self.charge(m.size())
        domain = self.sim.problem.domains[x]
        for z in view.pseudo_children:
            key = self.sent_keys[(epoch, z)]
            m = apply_key(m, x, dict(zip(domain, key)), "subtract")
        if view.is_root:
            if m.labels() != [x]:
                raise PdpopError(
                    f"root table has unresolved labels {m.labels()}")
            final, best = project_min(m, x)
            yield from self.charge(m.size())
            min_count = final.entries[0]
            return (min_count == 0, min_count, best.choices[0], None, seps)
        out, best = project_min(m, x)
        yield from self.charge(m.size())
        for y in view.pseudo_parents:
            pkg = self.recv_packages[(epoch, y)]
            key = self.recv_keys[(epoch, y)]
            dom_y = self.sim.problem.domains[y]
            amounts = {pkg.code_of(v, dom_y): key[i]
                       for i, v in enumerate(dom_y)}
            if pkg.var_code not in out.labels():
                # The back-edge constraint joined deeper in the subtree (its
                # scope reaches below this variable), so the coded axis is
                # absent here.  Broadcast the table along it so the key can
                # ride to the back-edge root, which de-obfuscates every
                # pseudo-child unconditionally.
                flat = FeasTable(
                    [Axis(pkg.var_code, pkg.coded_axis_values())],
                    [0] * len(pkg.domain_codes))
                out = join(out, flat)
            out = apply_key(out, pkg.var_code, amounts, "add")
        payload = table_to_payload(out)
        payload["epoch"] = epoch
        self.sim.log_logical("FEAS", sep=len(out.scope))
        yield from self.send(view.parent, "FEAS", payload)
        return (None, None, None, best if record_best else None, seps)

    # -- coded decision propagation --------------------------------------------

    def decision_phase(self, view: PseudoTreeView, epoch: int, best, seps,
                       root_value):
        x = self.var
        domain = self.sim.problem.domains[x]
        decided: dict = {}
        if view.is_root:
            my_value = root_value
        else:
            dm = yield from self.get(
                lambda m: m.type == "DECISION" and m.sender == view.parent
                and m.payload["epoch"] == epoch)
            decided = assignment_from_pairs(dm.payload["assignment"])
            my_value = best.lookup(decided)
        own_codes = {pkg.var_code: pkg
                     for (ep, _z), pkg in self.sent_packages.items()
                     if ep == epoch}
        for c in view.children:
            payload = {}
            for label in seps[c]:
                if label in own_codes:
                    payload[label] = own_codes[label].code_of(my_value, domain)
                elif label in decided:
                    payload[label] = decided[label]
                else:
                    raise PdpopError(
                        f"{x}: no coded assignment for separator label {label}")
            self.sim.log_logical("DECISION")
            yield from self.send(c, "DECISION", {
                "epoch": epoch, "assignment": assignment_to_pairs(payload)})
        return my_value

    # -- overall P-DPOP(+) ------------------------------------------------------

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
        yield from self.exchange_codenames(view, 0)
        yield from self.exchange_keys(view, 0)
        feasible, min_count, root_value, best, seps = yield from self.feas_phase(
            view, 0, record_best=True)
        my_value = yield from self.decision_phase(view, 0, best, seps, root_value)
        out = {"value": my_value}
        if view.is_root:
            out.update({"feasible": feasible, "min_violations": min_count,
                        "root": True})
        if self.sim.config.debug:
            out.update({"view": view,
                        "sent_packages": dict(self.sent_packages),
                        "recv_packages": dict(self.recv_packages),
                        "sent_keys": dict(self.sent_keys)})
        return out


def make_processes_plus(problem: Problem, sim: Sim, config: RunConfig,
                        preset_views=None, order_hint=None):
    return {x: PdpopProcess(x, sim, "plus", preset_views, order_hint)
            for x in problem.variables}


def make_processes_minus(problem: Problem, sim: Sim, config: RunConfig,
                         preset_views=None, order_hint=None):
    return {x: PdpopProcess(x, sim, "minus", preset_views, order_hint)
            for x in problem.variables}


register_solver("pdpop_plus", make_processes_plus, pad_default=True)
register_solver("pdpop", make_processes_minus, pad_default=True)
