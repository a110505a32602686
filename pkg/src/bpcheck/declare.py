"""Finite-trace evaluation of Declare templates and their subsumption lattice."""
from __future__ import annotations

from typing import Iterable, Sequence

from .model import Event, Kind, Template, Trace, Verdict

T = Template

AT_START = frozenset({T.AT_LEAST_ONE, T.AT_MOST_ONE, T.EXACTLY_ONE, T.ABSENCE})


def _check_params(template: Template, params: Sequence) -> None:
    if len(params) != template.arity:
        raise ValueError(f"{template} takes {template.arity} parameter(s), got {len(params)}")
    if template.arity == 2 and params[0] == params[1]:
        raise ValueError(f"{template} needs two distinct parameters, got {params[0]!r} twice")


def _satisfied(template: Template, a, b, seq: Sequence) -> bool:
    if template is T.AT_LEAST_ONE:
        return a in seq
    if template is T.AT_MOST_ONE:
        return seq.count(a) <= 1
    if template is T.EXACTLY_ONE:
        return seq.count(a) == 1
    if template is T.ABSENCE:
        return a not in seq
    if template is T.RESPONDED_EXISTENCE:
        return a not in seq or b in seq
    if template is T.RESPONSE:
        pending = False
        for s in seq:
            if s == a:
                pending = True
            elif s == b:
                pending = False
        return not pending
    if template is T.ALTERNATE_RESPONSE:
        pending = False
        for s in seq:
            if s == a:
                if pending:
                    return False
                pending = True
            elif s == b:
                pending = False
        return not pending
    if template is T.PRECEDENCE:
        seen_a = False
        for s in seq:
            if s == a:
                seen_a = True
            elif s == b and not seen_a:
                return False
        return True
    if template is T.ALTERNATE_PRECEDENCE:
        # every b needs an a since the previous b (or since the start)
        armed = False
        for s in seq:
            if s == a:
                armed = True
            elif s == b:
                if not armed:
                    return False
                armed = False
        return True
    if template is T.CO_EXISTENCE:
        return (a in seq) == (b in seq)
    if template is T.SUCCESSION:
        return _satisfied(T.RESPONSE, a, b, seq) and _satisfied(T.PRECEDENCE, a, b, seq)
    if template is T.ALTERNATE_SUCCESSION:
        return _satisfied(T.ALTERNATE_RESPONSE, a, b, seq) and _satisfied(
            T.ALTERNATE_PRECEDENCE, a, b, seq
        )
    if template is T.NOT_CO_EXISTENCE:
        return not (a in seq and b in seq)
    raise ValueError(f"unknown template {template!r}")


def activation_symbols(template: Template, params: Sequence) -> frozenset:
    """Symbols whose occurrence activates a binary template (empty for at-start templates)."""
    if template in AT_START:
        return frozenset()
    a, b = params
    if template in (T.RESPONDED_EXISTENCE, T.RESPONSE, T.ALTERNATE_RESPONSE):
        return frozenset({a})
    if template in (T.PRECEDENCE, T.ALTERNATE_PRECEDENCE):
        return frozenset({b})
    return frozenset({a, b})


def _activated(template: Template, params: Sequence, seq: Sequence) -> bool:
    if template in AT_START:
        return len(seq) > 0
    triggers = activation_symbols(template, params)
    return any(s in triggers for s in seq)


def evaluate(template: Template, params: Sequence, sequence: Sequence) -> Verdict:
    template = Template(template)
    _check_params(template, params)
    seq = list(sequence)
    a = params[0]
    b = params[1] if template.arity == 2 else None
    if not _satisfied(template, a, b, seq):
        return Verdict.VIOLATED
    if _activated(template, params, seq):
        return Verdict.SATISFIED_ACTIVATED
    return Verdict.SATISFIED_VACUOUSLY


def evaluate_role(constraint, trace: Trace | Sequence[Event]) -> Verdict:
    """Evaluate ``Absence(a) | role != r`` on a trace.

    Works for mined constraints (``params``) and fitted constraints
    (``components``) alike.
    """
    if constraint.kind is not Kind.ROLE:
        raise ValueError(f"expected a role constraint, got {constraint.kind}")
    activity, role = getattr(constraint, "components", None) or constraint.params
    events = trace.events if isinstance(trace, Trace) else trace
    seen = False
    for event in events:
        if event.activity == activity:
            if event.role != role:
                return Verdict.VIOLATED
            seen = True
    return Verdict.SATISFIED_ACTIVATED if seen else Verdict.SATISFIED_VACUOUSLY


def holds_on_all(template: Template, params: Sequence, sequences: Iterable[Sequence]) -> dict:
    holds = True
    activated = False
    for seq in sequences:
        verdict = evaluate(template, params, seq)
        if verdict is Verdict.VIOLATED:
            holds = False
            break
        if verdict is Verdict.SATISFIED_ACTIVATED:
            activated = True
    return {"holds": holds, "activated_somewhere": holds and activated}


# Each edge reads "stronger implies weaker"; ``swap`` marks that the weaker
# constraint takes the stronger one's parameters in reverse order.
SUBSUMPTION_EDGES: tuple[tuple[Template, Template, bool], ...] = (
    (T.ALTERNATE_SUCCESSION, T.SUCCESSION, False),
    (T.ALTERNATE_SUCCESSION, T.ALTERNATE_RESPONSE, False),
    (T.ALTERNATE_SUCCESSION, T.ALTERNATE_PRECEDENCE, False),
    (T.SUCCESSION, T.RESPONSE, False),
    (T.SUCCESSION, T.PRECEDENCE, False),
    (T.SUCCESSION, T.CO_EXISTENCE, False),
    (T.ALTERNATE_RESPONSE, T.RESPONSE, False),
    (T.ALTERNATE_PRECEDENCE, T.PRECEDENCE, False),
    (T.RESPONSE, T.RESPONDED_EXISTENCE, False),
    (T.CO_EXISTENCE, T.RESPONDED_EXISTENCE, False),
    (T.CO_EXISTENCE, T.RESPONDED_EXISTENCE, True),
    (T.EXACTLY_ONE, T.AT_LEAST_ONE, False),
    (T.EXACTLY_ONE, T.AT_MOST_ONE, False),
    (T.ABSENCE, T.AT_MOST_ONE, False),
)


def weaker_than(template: Template, params: tuple) -> set[tuple[Template, tuple]]:
    """All (template, params) bindings implied by ``template(params)``, excluding itself."""
    found: set[tuple[Template, tuple]] = set()
    frontier = [(Template(template), tuple(params))]
    while frontier:
        current, current_params = frontier.pop()
        for strong, weak, swap in SUBSUMPTION_EDGES:
            if strong is not current:
                continue
            weak_params = tuple(reversed(current_params)) if swap else current_params
            node = (weak, weak_params)
            if node not in found:
                found.add(node)
                frontier.append(node)
    found.discard((Template(template), tuple(params)))
    return found


def subsumes(stronger: tuple[Template, tuple], weaker: tuple[Template, tuple]) -> bool:
    s_template, s_params = stronger
    w_template, w_params = weaker
    return (Template(w_template), tuple(w_params)) in weaker_than(s_template, tuple(s_params))
