"""Checking selected constraints against a log, aggregation and explanations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .declare import evaluate, evaluate_role
from .labels import indefinite_article, past_participle
from .miner import action_sequence, object_sequence
from .model import (
    KIND_ORDER,
    EventLog,
    FittedConstraint,
    Kind,
    Template,
    Trace,
    Verdict,
    Violation,
)

T = Template


def check_trace(trace: Trace, c: FittedConstraint) -> Optional[Violation]:
    if c.kind is Kind.ROLE:
        verdict = evaluate_role(c, trace)
    elif c.kind is Kind.ACTIVITY:
        verdict = evaluate(c.template, c.symbols, trace.activities)
    elif c.kind is Kind.INTEROBJ:
        verdict = evaluate(c.template, c.symbols, object_sequence(trace.activities))
    else:
        projected = action_sequence(trace.activities, c.components[0])
        if not projected:
            return None
        verdict = evaluate(c.template, c.symbols, projected)
    if verdict is Verdict.VIOLATED:
        return Violation(trace.case_id, c)
    return None


def check_log(log: EventLog, constraints: Iterable[FittedConstraint]) -> set[Violation]:
    constraints = sorted(constraints, key=lambda c: c.key)
    found = set()
    for trace in log:
        for c in constraints:
            v = check_trace(trace, c)
            if v is not None:
                found.add(v)
    return found


def _cap(text: str) -> str:
    return text[:1].upper() + text[1:]


def _a(noun: str) -> str:
    return f"{indefinite_article(noun)} {noun}"


# Wording for intra-object constraints; {obj} is the article-prefixed object.
_INTRA = {
    T.AT_LEAST_ONE: "Each {o} must be {p1}",
    T.AT_MOST_ONE: "{obj} must not be {p1} more than once",
    T.EXACTLY_ONE: "{obj} must be {p1} exactly once",
    T.ABSENCE: "{obj} must not be {p1}",
    T.RESPONDED_EXISTENCE: "If {obj} is {p1}, it must also be {p2}",
    T.PRECEDENCE: "{obj} must be {p1} before it is {p2}",
    T.ALTERNATE_PRECEDENCE: "Each time {obj} is {p2}, it must have been {p1} since it was last {p2}",
    T.RESPONSE: "After {obj} is {p1}, it should be {p2}.",
    T.ALTERNATE_RESPONSE: "After {obj} is {p1}, it should be {p2} before it is {p1} again",
    T.SUCCESSION: "{obj} must be {p1} before it is {p2}, and {p2} after it is {p1}",
    T.ALTERNATE_SUCCESSION: "{obj} must be {p1} and {p2} in strict alternation",
    T.CO_EXISTENCE: "If {obj} is {p1}, it must also be {p2}, and vice versa",
    T.NOT_CO_EXISTENCE: "{obj} must not be both {p1} and {p2}",
}

# Wording for activity and inter-object constraints over two occurrences;
# {x}/{y} carry an article for objects, {xb}/{yb} never do.
_PAIR = {
    T.RESPONDED_EXISTENCE: "If {x} occurs, {y} should occur as well",
    T.PRECEDENCE: "{x} should appear before {y}",
    T.ALTERNATE_PRECEDENCE: "Each {yb} should be preceded by {x} since the previous {yb}",
    T.RESPONSE: "After {x}, {y} should follow",
    T.ALTERNATE_RESPONSE: "After {x}, {y} should follow before the next {xb}",
    T.SUCCESSION: "{x} should appear before {y}, and {y} should follow {x}",
    T.ALTERNATE_SUCCESSION: "{x} and {y} should alternate, starting with {xb}",
    T.CO_EXISTENCE: "{x} and {y} should occur together",
    T.NOT_CO_EXISTENCE: "{x} and {y} should not both occur",
}

# (kind, template) pairs whose wording follows published examples verbatim.
CURATED = frozenset(
    {
        (Kind.INTRAOBJ, T.AT_LEAST_ONE),
        (Kind.INTRAOBJ, T.PRECEDENCE),
        (Kind.INTRAOBJ, T.RESPONSE),
        (Kind.INTEROBJ, T.PRECEDENCE),
        (Kind.ROLE, T.ABSENCE),
    }
)


def explain(c) -> str:
    """One-sentence natural-language reading of a (fitted or mined) constraint."""
    components = getattr(c, "components", None) or c.params
    if c.kind is Kind.ROLE:
        activity, role = components
        return f"{activity} should be performed by {role}"
    if c.kind is Kind.INTRAOBJ:
        obj, n1, n2 = components
        text = _INTRA[c.template].format(
            o=obj,
            obj=_a(obj),
            p1=past_participle(n1),
            p2=past_participle(n2) if n2 else "",
        )
        return _cap(text)
    first, second = components
    if c.kind is Kind.INTEROBJ:
        x, y, xb, yb = _a(first), _a(second), first, second
    else:
        x = xb = f"'{first}'"
        y = yb = f"'{second}'"
    return _cap(_PAIR[c.template].format(x=x, y=y, xb=xb, yb=yb))


def is_curated(c) -> bool:
    return (c.kind, c.template) in CURATED


def display(c) -> str:
    """Compact notation such as ``Precedence(check, approve)|invoice``."""
    components = getattr(c, "components", None) or c.params
    if c.kind is Kind.INTRAOBJ:
        obj, *actions = components
        args = ", ".join(a for a in actions if a)
        return f"{c.template}({args})|{obj}"
    if c.kind is Kind.ROLE:
        activity, role = components
        return f"{c.template}({activity})|role != {role}"
    return f"{c.template}({', '.join(components)})"


@dataclass
class ViolationReport:
    groups: list[dict] = field(default_factory=list)
    totals: dict[str, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(g["count"] for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "totals": self.totals,
            "total": self.total,
            "groups": self.groups,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ViolationReport":
        groups = [dict(g) for g in data["groups"]]
        for g in groups:
            if g["count"] != len(g["case_ids"]):
                raise ValueError(f"group {g['key']} count does not match its case list")
        report = cls(groups, dict(data["totals"]), dict(data.get("config", {})))
        if "total" in data and data["total"] != report.total:
            raise ValueError("report total does not match its groups")
        return report

    def to_text(self) -> str:
        header = ("count", "kind", "constraint", "explanation", "cases")
        rows = [
            (
                str(g["count"]),
                g["kind"],
                g["display"],
                g["explanation"] + ("" if g["curated"] else " *"),
                ", ".join(g["case_ids"]),
            )
            for g in self.groups
        ]
        widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header) - 1)]
        lines = []
        for r in [header, *rows]:
            cells = [cell.ljust(w) for cell, w in zip(r, widths)] + [r[-1]]
            lines.append("  ".join(cells).rstrip())
        lines.append("")
        lines.append("totals: " + ", ".join(f"{k}={v}" for k, v in self.totals.items()) + f", all={self.total}")
        if any(not g["curated"] for g in self.groups):
            lines.append("* generated wording")
        return "\n".join(lines) + "\n"


def aggregate(violations: Iterable[Violation], log: EventLog, config: dict | None = None) -> ViolationReport:
    known = log.case_ids()
    by_key: dict[str, tuple[FittedConstraint, set[str]]] = {}
    for v in violations:
        if v.trace_ref not in known:
            raise ValueError(f"violation refers to unknown case {v.trace_ref}")
        entry = by_key.setdefault(v.constraint.key, (v.constraint, set()))
        entry[1].add(v.trace_ref)
    groups = []
    for key, (c, cases) in by_key.items():
        groups.append(
            {
                "key": key,
                "kind": str(c.kind),
                "template": str(c.template),
                "display": display(c),
                "explanation": explain(c),
                "curated": is_curated(c),
                "case_ids": sorted(cases),
                "count": len(cases),
            }
        )
    groups.sort(key=lambda g: (-g["count"], g["key"]))
    totals = {str(k): 0 for k in KIND_ORDER}
    for g in groups:
        totals[g["kind"]] += g["count"]
    return ViolationReport(groups, totals, dict(config or {}))
