"""Domain types shared by the mining, selection and checking stages."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional


_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_SEPARATORS = re.compile(r"[_\s]+")


def normalize_label(label: str) -> str:
    """Case-fold a label and collapse camelCase, underscores and whitespace runs."""
    text = _CAMEL.sub(" ", label)
    return _SEPARATORS.sub(" ", text).strip().casefold()


class Template(str, Enum):
    AT_LEAST_ONE = "AtLeastOne"
    AT_MOST_ONE = "AtMostOne"
    EXACTLY_ONE = "ExactlyOne"
    ABSENCE = "Absence"
    RESPONDED_EXISTENCE = "RespondedExistence"
    RESPONSE = "Response"
    ALTERNATE_RESPONSE = "AlternateResponse"
    PRECEDENCE = "Precedence"
    ALTERNATE_PRECEDENCE = "AlternatePrecedence"
    CO_EXISTENCE = "CoExistence"
    SUCCESSION = "Succession"
    ALTERNATE_SUCCESSION = "AlternateSuccession"
    NOT_CO_EXISTENCE = "NotCoExistence"

    @property
    def arity(self) -> int:
        return 1 if self in UNARY_TEMPLATES else 2

    def __str__(self) -> str:
        return self.value


UNARY_TEMPLATES = frozenset(
    {Template.AT_LEAST_ONE, Template.AT_MOST_ONE, Template.EXACTLY_ONE, Template.ABSENCE}
)

BINARY_TEMPLATES: tuple[Template, ...] = (
    Template.RESPONDED_EXISTENCE,
    Template.PRECEDENCE,
    Template.ALTERNATE_PRECEDENCE,
    Template.RESPONSE,
    Template.ALTERNATE_RESPONSE,
    Template.SUCCESSION,
    Template.ALTERNATE_SUCCESSION,
    Template.CO_EXISTENCE,
    Template.NOT_CO_EXISTENCE,
)


class Kind(str, Enum):
    ACTIVITY = "activity"
    INTEROBJ = "interobj"
    INTRAOBJ = "intraobj"
    ROLE = "role"

    def __str__(self) -> str:
        return self.value


KIND_ORDER: tuple[Kind, ...] = (Kind.ACTIVITY, Kind.INTEROBJ, Kind.INTRAOBJ, Kind.ROLE)

# AtMostOne is admitted for intra-object constraints in addition to the three
# unary templates of the per-kind table; see the decisions ledger.
INTRAOBJ_UNARY: tuple[Template, ...] = (
    Template.AT_LEAST_ONE,
    Template.AT_MOST_ONE,
    Template.EXACTLY_ONE,
    Template.ABSENCE,
)

TEMPLATES_BY_KIND: dict[Kind, frozenset[Template]] = {
    Kind.ACTIVITY: frozenset(BINARY_TEMPLATES),
    Kind.INTEROBJ: frozenset(BINARY_TEMPLATES),
    Kind.INTRAOBJ: frozenset(BINARY_TEMPLATES) | frozenset(INTRAOBJ_UNARY),
    Kind.ROLE: frozenset({Template.ABSENCE}),
}

PARAM_NAMES: dict[Kind, tuple[str, ...]] = {
    Kind.ACTIVITY: ("a1", "a2"),
    Kind.INTEROBJ: ("o1", "o2"),
    Kind.INTRAOBJ: ("object", "n1", "n2"),
    Kind.ROLE: ("a", "r"),
}


class Verdict(str, Enum):
    VIOLATED = "Violated"
    SATISFIED_ACTIVATED = "SatisfiedActivated"
    SATISFIED_VACUOUSLY = "SatisfiedVacuously"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Event:
    activity: str
    role: Optional[str] = None

    def __post_init__(self) -> None:
        if not isinstance(self.activity, str) or not self.activity.strip():
            raise ValueError("event activity must be a non-empty label")
        if self.role is not None and not self.role.strip():
            raise ValueError("absent roles are encoded as None, not as an empty string")


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(e.activity for e in self.events)

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...] = ()

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def case_ids(self) -> set[str]:
        return {t.case_id for t in self.traces}


def activities_of(log: EventLog) -> set[str]:
    return {e.activity for t in log.traces for e in t.events}


def roles_of(log: EventLog) -> set[str]:
    return {e.role for t in log.traces for e in t.events if e.role is not None}


def variants_of(log: EventLog) -> dict[tuple[str, ...], int]:
    return dict(Counter(t.activities for t in log.traces))


@dataclass(frozen=True)
class ProcessModel:
    """A model ``(A, F, R, D)``; ``net`` keeps the workflow net it was played out from."""

    id: str
    activities: frozenset[str]
    sequences: frozenset[tuple[str, ...]]
    roles: frozenset[str] = frozenset()
    role_map: Mapping[str, str] = field(default_factory=dict)
    net: Optional[object] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "activities", frozenset(self.activities))
        object.__setattr__(self, "sequences", frozenset(tuple(s) for s in self.sequences))
        object.__setattr__(self, "roles", frozenset(self.roles))
        object.__setattr__(self, "role_map", dict(sorted(self.role_map.items())))
        used = {a for seq in self.sequences for a in seq}
        undeclared = used - self.activities
        if undeclared:
            raise ValueError(f"model {self.id}: activities used but not declared: {sorted(undeclared)}")
        bad_keys = set(self.role_map) - self.activities
        if bad_keys:
            raise ValueError(f"model {self.id}: role_map keys not in activities: {sorted(bad_keys)}")
        bad_roles = set(self.role_map.values()) - self.roles
        if bad_roles:
            raise ValueError(f"model {self.id}: role_map values not in roles: {sorted(bad_roles)}")

    def __hash__(self) -> int:
        return hash((self.id, self.activities, self.sequences))


@dataclass(frozen=True)
class MinedConstraint:
    """A constraint mined from reference models.

    ``params`` holds the kind-specific parameters in the order of
    :data:`PARAM_NAMES`; for unary intra-object constraints the second action
    is ``None``.
    """

    kind: Kind
    template: Template
    params: tuple[Optional[str], ...]
    support: int = 1

    def __post_init__(self) -> None:
        kind = Kind(self.kind)
        template = Template(self.template)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "template", template)
        object.__setattr__(self, "params", tuple(self.params))
        if template not in TEMPLATES_BY_KIND[kind]:
            raise ValueError(f"template {template} is not admitted for {kind} constraints")
        if len(self.params) != len(PARAM_NAMES[kind]):
            raise ValueError(f"{kind} constraints take parameters {PARAM_NAMES[kind]}")
        if kind is Kind.INTRAOBJ:
            obj, n1, n2 = self.params
            if not obj or not n1:
                raise ValueError("intra-object constraints need an object and a first action")
            if template.arity == 1 and n2 is not None:
                raise ValueError("unary intra-object constraints have no second action")
            if template.arity == 2 and not n2:
                raise ValueError("binary intra-object constraints need a second action")
        elif any(not p for p in self.params):
            raise ValueError(f"{kind} constraint parameters must be non-empty: {self.params}")
        if isinstance(self.support, bool) or not isinstance(self.support, int) or self.support < 1:
            raise ValueError(f"support must be a positive integer, got {self.support!r}")

    @property
    def arity(self) -> int:
        return self.template.arity

    @property
    def key(self) -> str:
        return constraint_key(self.kind, self.template, self.params)

    @property
    def symbols(self) -> tuple[str, ...]:
        """Parameters the template quantifies over (excludes the intra-object scope)."""
        return symbols_of(self.kind, self.template, self.params)


def symbols_of(kind: Kind, template: Template, params: tuple) -> tuple[str, ...]:
    if kind is Kind.INTRAOBJ:
        return tuple(p for p in params[1:] if p is not None)
    if kind is Kind.ROLE:
        return (params[0],)
    return tuple(params)


def constraint_key(kind: Kind, template: Template, params: Iterable[Optional[str]]) -> str:
    parts = [str(Kind(kind)), str(Template(template))]
    parts.extend("" if p is None else p for p in params)
    return "|".join(parts)


def parse_key(key: str) -> tuple[Kind, Template, tuple[Optional[str], ...]]:
    kind, template, *params = key.split("|")
    kind_ = Kind(kind)
    values = tuple(p if p else None for p in params)
    return kind_, Template(template), values


@dataclass(frozen=True)
class FittedConstraint:
    """A mined constraint instantiated with components found in a concrete log."""

    source: MinedConstraint
    components: tuple[Optional[str], ...]
    sim: tuple[tuple[tuple[str, str], float], ...] = ()
    relevance: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "sim", tuple((tuple(pair), float(s)) for pair, s in self.sim))
        for (_, _), score in self.sim:
            if not score > self.epsilon:
                raise ValueError(f"similarity {score} does not exceed the fitting threshold {self.epsilon}")

    @property
    def kind(self) -> Kind:
        return self.source.kind

    @property
    def template(self) -> Template:
        return self.source.template

    @property
    def support(self) -> int:
        return self.source.support

    @property
    def key(self) -> str:
        return constraint_key(self.kind, self.template, self.components)

    @property
    def symbols(self) -> tuple[str, ...]:
        return symbols_of(self.kind, self.template, self.components)

    @property
    def avg_sim(self) -> float:
        if not self.sim:
            return 1.0
        return sum(s for _, s in self.sim) / len(self.sim)


def identity_fit(constraint: MinedConstraint) -> FittedConstraint:
    """Fit a constraint to a log that uses the model's own labels."""
    return FittedConstraint(source=constraint, components=constraint.params, relevance=1.0)


@dataclass(frozen=True)
class Violation:
    trace_ref: str
    constraint: FittedConstraint

    @property
    def key(self) -> tuple[str, str]:
        return (self.trace_ref, self.constraint.key)
