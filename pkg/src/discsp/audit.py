"""Transcript privacy auditor.

The auditor holds global ground truth (test-only omniscience) and scans a
run's transcript for observable leaks: deliveries between non-neighboring
agents, cleartext references to non-neighbors in payloads, plaintext
feasibility values where encryption is required, and decision propagation
where none is allowed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Problem
from .runtime import Record, Transcript


@dataclass(frozen=True)
class AuditSpec:
    """What the solver under audit promises."""

    encrypted_feas: bool = False   # FEAS payloads must contain no plain values
    forbid_decision: bool = False  # no DECISION messages at all


SPEC_BY_SOLVER = {
    "dpop": AuditSpec(),
    "pdpop": AuditSpec(),
    "pdpop_plus": AuditSpec(),
    "p32": AuditSpec(forbid_decision=True),
    "p32_plus": AuditSpec(forbid_decision=True),
    "p2": AuditSpec(encrypted_feas=True, forbid_decision=True),
    "p2_plus": AuditSpec(encrypted_feas=True, forbid_decision=True),
}


@dataclass(frozen=True)
class Finding:
    category: str  # non-neighbor-delivery | agent-privacy | constraint-privacy | decision-privacy
    tick: int
    detail: str


def _strings(obj):
    if isinstance(obj, str):
        yield obj
    elif isinstance(obj, dict):
        for k, v in obj.items():
            yield from _strings(k)
            yield from _strings(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _strings(v)


def _tables(obj):
    """Yield every table structure nested in a canonical payload."""
    if isinstance(obj, dict):
        if "scope" in obj and "entries" in obj:
            yield obj
        for v in obj.values():
            yield from _tables(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _tables(v)


def _assignments(obj):
    if isinstance(obj, dict):
        if "assignment" in obj and isinstance(obj["assignment"], list):
            yield obj["assignment"]
        for v in obj.values():
            yield from _assignments(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _assignments(v)


def audit(transcript: Transcript, problem: Problem,
          spec: AuditSpec) -> list[Finding]:
    findings: list[Finding] = []
    neighbors = {a: problem.agent_neighbors(a) | {a} for a in problem.agents}
    var_owner = problem.owner
    var_names = set(problem.variables)
    agent_names = set(problem.agents)

    def visible_to(receiver_agent: str, agent: str) -> bool:
        return agent in neighbors[receiver_agent]

    for rec in transcript:
        recv = rec.receiver_agent
        if not visible_to(recv, rec.sender_agent):
            findings.append(Finding(
                "non-neighbor-delivery", rec.tick,
                f"{rec.sender_agent} -> {recv}"))
        # Cleartext references to non-neighbors anywhere in the payload.
        for tok in set(_strings(rec.payload)):
            if tok in var_names and not visible_to(recv, var_owner[tok]):
                findings.append(Finding(
                    "agent-privacy", rec.tick,
                    f"variable name {tok!r} visible to {recv}"))
            elif tok in agent_names and not visible_to(recv, tok):
                findings.append(Finding(
                    "agent-privacy", rec.tick,
                    f"agent id {tok!r} visible to {recv}"))
        # Domain values attributed through real-name axis labels.
        for table in _tables(rec.payload):
            for ax in table["scope"]:
                label = ax["label"]
                if (isinstance(label, str) and label in var_names
                        and not visible_to(recv, var_owner[label])):
                    real = set(problem.domains[label]) & set(ax["values"])
                    if real:
                        findings.append(Finding(
                            "agent-privacy", rec.tick,
                            f"domain values of {label!r} visible to {recv}"))
        if spec.encrypted_feas and _is_feas(rec):
            for table in _tables(rec.payload):
                if any(isinstance(e, (bool, int)) for e in table["entries"]):
                    findings.append(Finding(
                        "constraint-privacy", rec.tick,
                        "plaintext feasibility value in FEAS payload"))
        if _is_decision(rec):
            if spec.forbid_decision:
                findings.append(Finding(
                    "decision-privacy", rec.tick,
                    "DECISION message in a decision-private run"))
            else:
                for pairs in _assignments(rec.payload):
                    if any(isinstance(label, str) and label in var_names
                           for label, _v in pairs):
                        findings.append(Finding(
                            "decision-privacy", rec.tick,
                            "cleartext variable assignment in DECISION"))
    return findings


def _inner_type(rec: Record) -> str:
    if rec.type in ("PREV", "LAST") and isinstance(rec.payload, dict):
        return rec.payload.get("inner_type", rec.type)
    return rec.type


def _is_feas(rec: Record) -> bool:
    return _inner_type(rec) == "FEAS"


def _is_decision(rec: Record) -> bool:
    return _inner_type(rec) == "DECISION"


def summarize(findings: list[Finding]) -> dict:
    out: dict[str, int] = {}
    for f in findings:
        out[f.category] = out.get(f.category, 0) + 1
    return out
