"""Deterministic multi-agent simulation runtime.

Each variable runs a protocol coroutine (a Python generator) that yields
effects: ``("send", dst, Msg)``, ``("recv",)`` and ``("compute", units)``.
The scheduler delivers messages in global send order, which preserves FIFO
per channel and makes every run a pure function of the seed.  Every
delivered message is appended to the transcript with a canonical payload
snapshot and its wire size; simulated time is tracked per variable with the
usual dependency-max rule (a receiver's clock is at least the sender's clock
at send time).
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from collections import deque
from dataclasses import dataclass, field

from .model import Problem


class SimError(RuntimeError):
    pass


class DeadlockError(SimError):
    pass


class SimTimeout(SimError):
    pass


@dataclass
class Msg:
    type: str
    payload: dict
    sender: "str | None" = None  # variable name; None for unwrapped routed payloads


# ------------------------------------------------------- canonical encoding

def canonical(obj):
    """Reduce a payload to JSON-able structure (dicts/lists/ints/strs/bools).

    Objects exposing .canonical() (tables, cyphertexts) encode themselves.
    """
    if hasattr(obj, "canonical"):
        return canonical(obj.canonical())
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, (int, str, bool)) or obj is None:
        return obj
    raise TypeError(f"payload value {obj!r} is not canonically encodable")


def wire_size(struct) -> int:
    """Length of the canonical byte encoding: strings are utf-8 with a
    4-byte length prefix, integers big-endian with a 4-byte length prefix,
    containers prefix their item count."""
    if isinstance(struct, bool):
        return 1
    if isinstance(struct, int):
        n = abs(struct)
        return 5 + ((n.bit_length() + 7) // 8 or 1)
    if struct is None:
        return 1
    if isinstance(struct, str):
        return 4 + len(struct.encode("utf-8"))
    if isinstance(struct, list):
        return 4 + sum(wire_size(v) for v in struct)
    if isinstance(struct, dict):
        return 4 + sum(wire_size(k) + wire_size(v) for k, v in struct.items())
    raise TypeError(f"not canonical: {struct!r}")


# --------------------------------------------------------------- transcript

@dataclass(frozen=True)
class Record:
    tick: int
    sender_var: str
    sender_agent: str
    receiver_var: str
    receiver_agent: str
    type: str
    payload: object  # canonical structure
    size: int
    sent_clock: int


@dataclass
class Transcript:
    records: list[Record] = field(default_factory=list)

    def append(self, rec: Record):
        self.records.append(rec)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def to_jsonl(self) -> str:
        return "\n".join(
            json.dumps({
                "tick": r.tick, "sender_var": r.sender_var,
                "sender_agent": r.sender_agent, "receiver_var": r.receiver_var,
                "receiver_agent": r.receiver_agent, "type": r.type,
                "size": r.size, "sent_clock": r.sent_clock,
                "payload": r.payload,
            }, sort_keys=True)
            for r in self.records
        ) + ("\n" if self.records else "")


def simulated_time(transcript: Transcript, cost_fn) -> int:
    """Longest dependency-chain cost over the message causality graph.

    cost_fn(record) is the compute cost the sender incurred to produce that
    message; a receiver's clock is the max of its own clock and the sender's
    clock at send time.  Transmission itself is free.
    """
    clocks: dict[str, int] = {}
    for rec in transcript:
        t = clocks.get(rec.sender_var, 0) + cost_fn(rec)
        clocks[rec.sender_var] = t
        clocks[rec.receiver_var] = max(clocks.get(rec.receiver_var, 0), t)
    return max(clocks.values(), default=0)


# ----------------------------------------------------------------- metrics

@dataclass
class Metrics:
    simulated_time: int = 0
    message_count: int = 0
    info_bytes: int = 0
    logical_counts: dict = field(default_factory=dict)
    physical_counts: dict = field(default_factory=dict)
    sep_max: int = 0
    stats: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def bump(self, counter: dict, key: str, n: int = 1):
        counter[key] = counter.get(key, 0) + n

    def csv_header(self) -> list[str]:
        return ["simulated_time", "message_count", "info_bytes", "sep_max"]

    def csv_row(self) -> list:
        return [self.simulated_time, self.message_count, self.info_bytes,
                self.sep_max]


# ------------------------------------------------------------------ config

@dataclass
class RunConfig:
    key_bits: int = 512
    b_bits: int = 128
    incr_min: int = 10
    pad: bool | None = None      # None = solver default
    variant: str = "plus"        # "plus" or "minus"
    crypto_cost_units: int = 1000
    election_rounds: int | None = None  # None = number of variables
    timeout_secs: float | None = None
    debug: bool = False
    true_power_bound: int = 1 << 16


def derive_rng(seed: int, *context) -> random.Random:
    """Deterministic per-context PRNG independent of hash randomization."""
    key = ":".join([str(seed)] + [str(c) for c in context])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


# ---------------------------------------------------------------- processes

class Stop(Exception):
    """Raised into a process to make it bail out to its service loop."""


class Process:
    """Base class for per-variable protocol state machines.

    Subclasses implement main(); helper generators use ``yield from`` and the
    effect vocabulary send/recv/compute.  Messages that arrive while main is
    blocked are funneled through intercept handlers (routing, ring services);
    unconsumed messages are stashed until a later wait matches them.
    """

    def __init__(self, var: str, sim: "Sim"):
        self.var = var
        self.sim = sim
        self.stash: list[Msg] = []
        self.done = False
        self.result: dict = {}
        self.aborted = False

    # -- effects -----------------------------------------------------------

    def send(self, dst: str, msg_type: str, payload: dict):
        yield ("send", dst, Msg(msg_type, payload, sender=self.var))

    def charge(self, units: int):
        if units:
            yield ("compute", units)

    def get(self, match=None, until=None):
        """Wait for a message satisfying `match`, servicing intercepts.

        `until` is an optional zero-arg predicate checked after every
        handled message; when it turns true, returns None.  An abort flag
        set by an intercept bails out of the wait entirely.
        """
        while True:
            if self.aborted:
                raise Stop()
            if until is not None and until():
                return None
            if match is not None:
                for i, m in enumerate(self.stash):
                    if match(m):
                        return self.stash.pop(i)
            incoming = yield ("recv",)
            arrivals = [incoming]
            while arrivals:
                m = arrivals.pop(0)
                handled = yield from self.intercept(m, arrivals)
                if self.aborted:
                    raise Stop()
                if handled:
                    continue
                if match is not None and match(m):
                    # Drain remaining unwrapped arrivals into the stash first.
                    self.stash.extend(arrivals)
                    return m
                self.stash.append(m)

    def intercept(self, msg: Msg, arrivals: list) -> bool:
        """Handle service traffic; return True when consumed.

        Subclasses extend this.  Appending to `arrivals` re-injects an
        unwrapped payload as a fresh arrival.
        """
        if False:
            yield  # pragma: no cover - makes this a generator
        return False

    # -- lifecycle ---------------------------------------------------------

    def main(self):
        raise NotImplementedError

    def run(self):
        try:
            result = yield from self.main()
            self.result = result or {}
        except Stop:
            self.result = self.stopped_result()
        self.done = True
        # Keep servicing ring traffic until global quiescence.
        while True:
            msg = yield ("recv",)
            arrivals = [msg]
            while arrivals:
                m = arrivals.pop(0)
                yield from self.intercept(m, arrivals)
                # Unmatched post-completion traffic is dropped.

    def stopped_result(self) -> dict:
        return {"aborted": True}


# ------------------------------------------------------------------ engine

class Sim:
    """Single-threaded discrete-event scheduler over FIFO channels."""

    def __init__(self, problem: Problem, seed: int, config: RunConfig):
        self.problem = problem
        self.seed = seed
        self.config = config
        self.transcript = Transcript()
        self.metrics = Metrics()
        self.clocks: dict[str, int] = {}
        self.processes: dict[str, Process] = {}
        self._gens: dict[str, object] = {}
        self._waiting: dict[str, bool] = {}
        self._inbox: dict[str, deque] = {}
        self._queue: deque = deque()
        self._seq = 0
        self._deadline = None
        self.neighbor_vars = {
            x: set(problem.neighbor_vars(x)) for x in problem.variables
        }

    def add_process(self, proc: Process):
        self.processes[proc.var] = proc
        self._inbox[proc.var] = deque()

    def rng(self, *context) -> random.Random:
        return derive_rng(self.seed, *context)

    # -- running -----------------------------------------------------------

    def run(self, timeout_secs: float | None = None):
        if timeout_secs:
            self._deadline = time.monotonic() + timeout_secs
        for var in sorted(self.processes):
            gen = self.processes[var].run()
            self._gens[var] = gen
            self._advance(var, first=True)
        while self._queue:
            if self._deadline is not None and time.monotonic() > self._deadline:
                raise SimTimeout(f"simulation exceeded {timeout_secs}s")
            seq, src, dst, msg, sent_clock = self._queue.popleft()
            self._deliver(seq, src, dst, msg, sent_clock)
        blocked = [v for v, p in self.processes.items() if not p.done]
        if blocked:
            detail = {v: [m.type for m in self.processes[v].stash] for v in blocked}
            raise DeadlockError(
                f"no deliverable messages; blocked processes: {blocked}; "
                f"stashed message types: {detail}"
            )
        self.metrics.simulated_time = max(self.clocks.values(), default=0)
        return {v: p.result for v, p in self.processes.items()}

    def _deliver(self, seq, src, dst, msg, sent_clock):
        if dst not in self.processes:
            raise SimError(f"message to unknown variable {dst}")
        struct = canonical({"type": msg.type, "payload": msg.payload})
        size = wire_size(struct)
        owner = self.problem.owner
        self.transcript.append(Record(
            tick=len(self.transcript.records), sender_var=src,
            sender_agent=owner[src], receiver_var=dst,
            receiver_agent=owner[dst], type=msg.type,
            payload=struct["payload"], size=size, sent_clock=sent_clock,
        ))
        self.metrics.message_count += 1
        self.metrics.info_bytes += size
        self.metrics.bump(self.metrics.physical_counts, msg.type)
        self.clocks[dst] = max(self.clocks.get(dst, 0), sent_clock)
        self._inbox[dst].append(msg)
        self._advance(dst)

    def _advance(self, var: str, first: bool = False):
        gen = self._gens[var]
        try:
            if first:
                effect = gen.send(None)
            else:
                if not self._waiting.get(var) or not self._inbox[var]:
                    return
                self._waiting[var] = False
                effect = gen.send(self._inbox[var].popleft())
            while True:
                kind = effect[0]
                if kind == "recv":
                    if self._inbox[var]:
                        effect = gen.send(self._inbox[var].popleft())
                        continue
                    self._waiting[var] = True
                    return
                if kind == "send":
                    _, dst, msg = effect
                    self._check_channel(var, dst)
                    self._seq += 1
                    self._queue.append(
                        (self._seq, var, dst, msg, self.clocks.get(var, 0)))
                    effect = gen.send(None)
                    continue
                if kind == "compute":
                    self.clocks[var] = self.clocks.get(var, 0) + effect[1]
                    effect = gen.send(None)
                    continue
                raise SimError(f"unknown effect {effect!r}")
        except StopIteration:
            self._waiting[var] = False

    def _check_channel(self, src: str, dst: str):
        if dst == src:
            return
        if dst in self.neighbor_vars[src]:
            return
        if self.problem.owner[src] == self.problem.owner[dst]:
            return
        raise SimError(
            f"channel violation: {src} -> {dst} are not constraint-graph "
            f"neighbors"
        )

    # -- logical accounting (used by protocols) ------------------------------

    def log_logical(self, msg_type: str, sep: int | None = None):
        self.metrics.bump(self.metrics.logical_counts, msg_type)
        if sep is not None:
            self.metrics.sep_max = max(self.metrics.sep_max, sep)

    def stat(self, key: str, n: int = 1):
        self.metrics.bump(self.metrics.stats, key, n)

    def note(self, key: str, value):
        self.metrics.notes.setdefault(key, []).append(value)
