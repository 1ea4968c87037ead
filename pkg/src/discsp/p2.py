"""P2-DPOP(+): encrypted boolean propagation along a linear order.

ElGamal is not fully homomorphic: OR of two cyphertexts works, but AND only
against a cleartext boolean, so the bottom-up propagation runs on a linear
variable ordering (the circular order of the iteration's pseudo-tree, cut
at the root) where each variable joins exactly one encrypted message with
its own cleartext local table.  Feasibility values travel as cyphertexts
under the compound key, labels as codenames; only the root learns a value,
found by dichotomic collaborative decryption.  Rerooting, grounding and
early termination are inherited from the P^3/2 machinery.
"""

from __future__ import annotations

from . import crypto
from .dpop import local_join, table_from_payload, table_to_payload
from .kernel import PseudoTreeView, circular_order
from .model import Problem
from .p32 import P32Process
from .runtime import RunConfig, Sim
from .solvers import register_solver
from .tables import FeasTable, join, map_entries, project


class P2Error(RuntimeError):
    pass


def boolean_local_join(problem: Problem, view: PseudoTreeView,
                       extra=()) -> FeasTable:
    """Conjunction of the locally joined constraints (True = feasible).

    Works on the original DisCSP: the eligibility rule is the pseudo-tree
    one, so each constraint enters the chain exactly once, at its deepest
    scope variable; on the linear order that variable may well not be
    adjacent to the constraint's other variables."""
    t = local_join(problem, view, tuple(extra))
    return map_entries(t, lambda e: e == 0)


def project_or(t: FeasTable, label) -> FeasTable:
    return project(t, label, any)


def shadow_linear_tables(problem: Problem, views: dict,
                         extras: dict | None = None):
    """Cleartext shadow of the encrypted pipeline (test oracle).

    Returns ({sender: table sent}, root_table) with real labels, following
    the linear order induced by the pseudo-tree."""
    order = circular_order(views)
    extras = extras or {}
    sent: dict[str, FeasTable] = {}
    prev = None
    for x in reversed(order[1:]):
        m = boolean_local_join(problem, views[x], extras.get(x, ()))
        if prev is not None:
            m = join(m, prev, combine=lambda a, b: a and b)
        out = project_or(m, x)
        sent[x] = out
        prev = out
    root = order[0]
    final = boolean_local_join(problem, views[root], extras.get(root, ()))
    if prev is not None:
        final = join(final, prev, combine=lambda a, b: a and b)
    return sent, final


def feasible_value(domain, entries, decrypt, combine_or):
    """Dichotomic search for an entry that decrypts true.

    `decrypt` is a generator function (cyphertext -> bool); `combine_or`
    folds two cyphertexts homomorphically.  Returns the found domain value
    or None.  Uses between ceil(log2 |D|) and ceil(log2 |D| + 1)
    decryptions."""
    def rec(lo, hi):
        if lo < hi:
            mid = (lo + hi) // 2
            c = entries[lo]
            for i in range(lo + 1, mid + 1):
                c = combine_or(c, entries[i])
            feasible = yield from decrypt(c)
            if feasible:
                return (yield from rec(lo, mid))
            return (yield from rec(mid + 1, hi))
        feasible = yield from decrypt(entries[lo])
        return domain[lo] if feasible else None

    return (yield from rec(0, len(domain) - 1))


class P2Process(P32Process):
    """Rerooted solver whose per-iteration propagation is the encrypted
    linear-order pipeline."""

    def _encrypt_table(self, t: FeasTable) -> FeasTable:
        out = map_entries(
            t, lambda b: crypto.encrypt(self.params, self.compound, bool(b),
                                        self.crypto_rng))
        self.sim.stat("p2_enc", t.size())
        return out

    def encrypted_join(self, enc: FeasTable, plain: FeasTable) -> FeasTable:
        exps = [0]

        def combine(c, b):
            if not isinstance(c, crypto.Cyphertext) or isinstance(
                    b, crypto.Cyphertext):
                raise P2Error("encrypted join needs cyphertext AND cleartext")
            exps[0] += 2
            return crypto.and_cleartext(self.params, self.compound, c,
                                        bool(b), self.crypto_rng)

        out = join(enc, plain, combine=combine)
        return out, exps[0]

    def encrypted_project(self, enc: FeasTable) -> FeasTable:
        exps = [0]

        def reduce_or(cells):
            c = cells[0]
            for other in cells[1:]:
                c = crypto.or_cipher(self.params, c, other)
            exps[0] += 2
            return crypto.rerandomize_fresh(self.params, self.compound, c,
                                            self.crypto_rng)

        out = project(enc, self.var, reduce_or)
        return out, exps[0]

    def _counted_decrypt(self, c):
        self._dichotomy_count += 1
        result = yield from self.ring_decrypt_bool(c)
        return result

    def iteration_propagate(self, view: PseudoTreeView, epoch: int):
        yield from self.exchange_codenames(view, epoch)
        x = self.var
        problem = self.sim.problem
        plain = boolean_local_join(problem, view, tuple(self.local_constraints))
        yield from self.charge(plain.size())
        plain = self.apply_ancestor_codes(plain, view, epoch)

        if not view.is_root:
            m = yield from self.get(
                lambda m: m.type in ("START", "FEAS")
                and m.payload.get("epoch") == epoch)
            if m.type == "START":
                out = project_or(plain, x)
                out = self._encrypt_table(out)
                yield from self.charge_exps(2 * out.size())
            else:
                enc = table_from_payload(m.payload)
                enc = self.resolve_own_codes(enc, epoch)
                enc, exps = self.encrypted_join(enc, plain)
                yield from self.charge_exps(exps)
                out, exps = self.encrypted_project(enc)
                yield from self.charge_exps(exps)
            payload = table_to_payload(out)
            payload["epoch"] = epoch
            yield from self.route_to_previous(epoch, "FEAS", payload,
                                              sep=len(out.scope))
            return None, None

        # Root: trigger the chain, collect the final table, decrypt a value.
        if view.children:
            yield from self.route_to_previous(epoch, "START", {"epoch": epoch})
            m = yield from self.get(
                lambda m: m.type == "FEAS" and m.payload.get("epoch") == epoch)
            enc = table_from_payload(m.payload)
            enc = self.resolve_own_codes(enc, epoch)
            if enc.labels() != [x]:
                raise P2Error(f"root table has unresolved labels {enc.labels()}")
            enc, exps = self.encrypted_join(enc, plain)
            yield from self.charge_exps(exps)
        else:
            enc = self._encrypt_table(plain)
            yield from self.charge_exps(2 * enc.size())
        domain = enc.scope[0].values
        self._dichotomy_count = 0
        value = yield from feasible_value(
            domain, enc.entries, self._counted_decrypt,
            lambda a, b: crypto.or_cipher(self.params, a, b))
        self.sim.note("p2_decrypt_counts", self._dichotomy_count)
        return value is not None, value


def make_processes_plus(problem: Problem, sim: Sim, config: RunConfig,
                        order_hint=None):
    return {x: P2Process(x, sim, "plus", order_hint)
            for x in problem.variables}


def make_processes_minus(problem: Problem, sim: Sim, config: RunConfig,
                         order_hint=None):
    return {x: P2Process(x, sim, "minus", order_hint)
            for x in problem.variables}


register_solver("p2_plus", make_processes_plus, pad_default=True)
register_solver("p2", make_processes_minus, pad_default=True)
