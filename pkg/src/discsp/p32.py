"""P^3/2-DPOP(+): rerooted propagation with full decision privacy.

Decision propagation is removed entirely: only the root of each iteration
learns a value (its own), then grounds it with a private unary constraint
and the pseudo-tree is rebuilt around the next root.  The root order is
hidden by encrypted root vectors that every agent shuffles with a secret
permutation; popping and collaboratively decrypting vector entries reveals,
per iteration, to exactly one variable that its turn has come.

All ring traffic (key shares, vectors, decryption tickets) rides the
circular order of the initial temporary pseudo-tree (epoch 0), which is the
only ring guaranteed complete at all times; per-iteration trees are used for
the tree-shaped propagation phases only.
"""

from __future__ import annotations

from . import crypto
from .kernel import PseudoTreeView
from .model import Constraint, Problem
from .pdpop import PdpopProcess
from .runtime import Msg, RunConfig, Sim
from .solvers import register_solver


class P32Error(RuntimeError):
    pass


class P32Process(PdpopProcess):
    """One variable's state machine for the rerooted encrypted solvers."""

    def __init__(self, var: str, sim: Sim, variant: str = "plus",
                 order_hint=None):
        super().__init__(var, sim, variant, None, order_hint)
        self.params = crypto.group_for_bits(sim.config.key_bits)
        self.key_share: crypto.KeyPairShare | None = None
        self.compound: crypto.CompoundPublicKey | None = None
        self.vector: list[crypto.Cyphertext] = []
        self.my_vect_id: int | None = None
        self.perm: list[int] = []
        self.vector_home = False
        self.is_temp_root = False
        self.decr_codenames: set[int] = set()
        self.crypto_rng = sim.rng(var, "crypto")
        self.ticket_rng = sim.rng(var, "ticket")
        self.shuffled_snapshot: list[crypto.Cyphertext] = []

    # -- crypto helpers -------------------------------------------------------

    def charge_exps(self, n: int):
        yield from self.charge(n * self.sim.config.crypto_cost_units)

    def fresh_small(self, v: int) -> crypto.Cyphertext:
        return crypto.encrypt_small(self.params, self.compound, v,
                                    self.crypto_rng)

    # -- phase 1: shares ------------------------------------------------------

    def setup_compound_key(self, n_plus: int, share_count: int):
        """Circulate public key shares; every variable ends with the same
        compound key built from all n+ shares."""
        self.key_share = crypto.generate_share(self.params, self.crypto_rng)
        publics = crypto.split_public_shares(
            self.params, self.key_share, share_count, self.crypto_rng)
        mine = set(publics)
        for share in publics:
            yield from self.route_to_previous(0, "SHARE", {"share": share})
        collected = []
        for _ in range(n_plus):
            m = yield from self.get(lambda m: m.type == "SHARE")
            share = m.payload["share"]
            collected.append(share)
            if share not in mine:
                yield from self.route_to_previous(0, "SHARE", {"share": share},
                                                  log=False)
        self.compound = crypto.combine_public(self.params, sorted(collected))
        return self.compound

    # -- phase 2: vector shuffling ---------------------------------------------

    def start_shuffle(self):
        ids = self.ids
        n_plus = ids.total_bound
        entries = []
        for j in range(n_plus):
            if j == ids.id:
                entries.append(0)
            elif ids.id < j <= ids.next_bound:
                entries.append(-1)
            else:
                entries.append(1)
        rng = self.sim.rng(self.var, "shuffle")
        self.my_vect_id = rng.getrandbits(128)
        self.perm = list(range(n_plus))
        rng.shuffle(self.perm)
        vect = [self.fresh_small(v) for v in entries]
        self.sim.stat("p32_shuffle_enc", n_plus)
        yield from self.charge_exps(2 * n_plus)
        yield from self.route_to_previous(0, "VECT", {
            "id": self.my_vect_id, "round": 1,
            "vector": [c.canonical() for c in vect],
        })

    def _handle_vect(self, payload: dict):
        vect = [crypto.Cyphertext(e["alpha"], e["beta"])
                for e in payload["vector"]]
        vid, rnd = payload["id"], payload["round"]
        overwrite: set[int] = set()
        if rnd == 1:
            if vid != self.my_vect_id:
                overwrite = set(range(self.ids.id + 1, self.ids.next_bound + 1))
            else:
                rnd += 1
        if rnd > 1 and self.is_temp_root:
            rnd += 1
        if rnd == 3:
            vect = [vect[self.perm[j]] for j in range(len(vect))]
        if rnd == 4 and vid == self.my_vect_id:
            self.vector = vect
            self.vector_home = True
            return
        out = []
        for j, c in enumerate(vect):
            if j in overwrite:
                out.append(self.fresh_small(-1))
            else:
                out.append(crypto.rerandomize_fresh(self.params, self.compound,
                                                    c, self.crypto_rng))
        self.sim.stat("p32_shuffle_enc", len(out))
        yield from self.charge_exps(2 * len(out))
        yield from self.route_to_previous(0, "VECT", {
            "id": vid, "round": rnd,
            "vector": [c.canonical() for c in out],
        }, log=False)

    def shuffle_vectors(self):
        yield from self.start_shuffle()
        yield from self.get(until=lambda: self.vector_home)
        self.shuffled_snapshot = list(self.vector)

    # -- collaborative decryption ------------------------------------------------

    def ring_decrypt_element(self, c: crypto.Cyphertext) -> int:
        """Send a decryption ticket around the epoch-0 ring; every other
        variable strips its share, and we finish with our own."""
        codename = self.ticket_rng.getrandbits(128)
        while codename in self.decr_codenames:
            codename += 1
        self.decr_codenames.add(codename)
        yield from self.route_to_previous(0, "DECR", {
            "codename": codename, "alpha": c.alpha, "beta": c.beta})
        m = yield from self.get(
            lambda m: m.type == "DECR" and m.payload["codename"] == codename)
        partial = crypto.Cyphertext(m.payload["alpha"], m.payload["beta"])
        final = crypto.strip_share(self.params, partial, self.key_share)
        self.sim.stat("decrypt_partials")
        yield from self.charge_exps(1)
        return final.alpha

    def ring_decrypt_small(self, c: crypto.Cyphertext) -> int:
        element = yield from self.ring_decrypt_element(c)
        return crypto.decode_small(self.params, element)

    def ring_decrypt_bool(self, c: crypto.Cyphertext) -> bool:
        element = yield from self.ring_decrypt_element(c)
        return self.params.decode(element) > 0

    # -- standing services ----------------------------------------------------------

    def intercept(self, msg: Msg, arrivals: list):
        handled = yield from super().intercept(msg, arrivals)
        if handled:
            return True
        if msg.type == "VECT":
            yield from self._handle_vect(msg.payload)
            return True
        if msg.type == "DECR":
            if msg.payload["codename"] in self.decr_codenames:
                return False  # our ticket coming home: let the waiter match it
            partial = crypto.strip_share(
                self.params,
                crypto.Cyphertext(msg.payload["alpha"], msg.payload["beta"]),
                self.key_share)
            self.sim.stat("decrypt_partials")
            yield from self.charge_exps(1)
            yield from self.route_to_previous(0, "DECR", {
                "codename": msg.payload["codename"],
                "alpha": partial.alpha, "beta": partial.beta}, log=False)
            return True
        if msg.type == "ABORT":
            view = self.views[msg.payload["epoch"]]
            for c in view.children:
                yield from self.send(c, "ABORT", dict(msg.payload))
            self.aborted = True
            return True
        return False

    # -- per-iteration propagation (overridden by P2) ---------------------------------

    def iteration_propagate(self, view: PseudoTreeView, epoch: int):
        """Returns (feasible, root_value) at the root, (None, None) elsewhere."""
        yield from self.exchange_codenames(view, epoch)
        yield from self.exchange_keys(view, epoch)
        feasible, _count, root_value, _best, _seps = yield from self.feas_phase(
            view, epoch, record_best=False)
        return feasible, root_value

    def ground(self, value, epoch: int):
        x = self.var
        domain = self.sim.problem.domains[x]
        self.local_constraints.append(Constraint.from_predicate(
            (x,), (domain,), lambda v: v == value,
            visibility={self.sim.problem.owner[x]}, name=f"ground_{x}_{epoch}"))

    # -- main -------------------------------------------------------------------------

    def main(self):
        rounds = (self.sim.config.election_rounds
                  or len(self.sim.problem.variables))
        self.is_temp_root = yield from self.elect_root(rounds)
        yield from self.build_tree(0, self.is_temp_root)
        ids = yield from self.assign_ids(0, self.sim.config.incr_min)
        n_plus = ids.total_bound
        yield from self.setup_compound_key(n_plus, ids.next_bound - ids.id + 1)
        yield from self.shuffle_vectors()

        my_value = None
        feasible_out = None
        root_iteration = None
        epoch = 0
        while self.vector:
            # Reroot: pop and decrypt entries, skipping unassigned-ID slots.
            entry = None
            while self.vector:
                c = self.vector.pop(0)
                entry = yield from self.ring_decrypt_small(c)
                if entry != -1:
                    break
                entry = None
            if entry is None:
                break  # only padding was left; every variable has been root
            epoch += 1
            i_am_root = entry == 0
            view = yield from self.build_tree(epoch, i_am_root)
            feasible, root_value = yield from self.iteration_propagate(view, epoch)
            if i_am_root:
                self.sim.stat("iterations")
                self.sim.note("roots", self.var)
                root_iteration = epoch
                if not feasible:
                    if epoch != 1:
                        raise P32Error(
                            f"infeasibility surfaced at iteration {epoch}")
                    for c in view.children:
                        yield from self.send(c, "ABORT", {"epoch": epoch})
                    feasible_out = False
                    break
                feasible_out = True if epoch == 1 else feasible_out
                my_value = root_value
                self.ground(root_value, epoch)
        out = {}
        if my_value is None and feasible_out is not False:
            raise P32Error(f"{self.var} never became root")
        if my_value is not None:
            out["value"] = my_value
        if root_iteration == 1:
            out.update({"feasible": feasible_out, "root": True})
        if self.sim.config.debug:
            out.update({
                "ids": self.ids, "compound": self.compound,
                "private": self.key_share, "perm": list(self.perm),
                "shuffled_vector": list(self.shuffled_snapshot),
            })
        return out

    def stopped_result(self) -> dict:
        return {"aborted": True}


def make_processes_plus(problem: Problem, sim: Sim, config: RunConfig,
                        order_hint=None):
    return {x: P32Process(x, sim, "plus", order_hint)
            for x in problem.variables}


def make_processes_minus(problem: Problem, sim: Sim, config: RunConfig,
                         order_hint=None):
    return {x: P32Process(x, sim, "minus", order_hint)
            for x in problem.variables}


register_solver("p32_plus", make_processes_plus, pad_default=True)
register_solver("p32", make_processes_minus, pad_default=True)
