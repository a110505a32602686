"""Fitting mined constraints to a log, relevance scoring, selection and repair."""
from __future__ import annotations

import dataclasses
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .automata import (
    DEFAULT_MCS_CAP,
    StateBudgetExceeded,
    connected_groups,
    is_consistent,
    minimal_correction_sets,
    minimal_unsatisfiable_subset,
    small_cores,
)
from .labels import SynonymLexicon, default_lexicon, ordered_pairs
from .model import (
    KIND_ORDER,
    EventLog,
    FittedConstraint,
    Kind,
    MinedConstraint,
    activities_of,
    normalize_label,
    parse_key,
    roles_of,
)
from .similarity import DEFAULT_EPSILON, LexicalSimilarity, SimilarityProvider

log = logging.getLogger(__name__)

COMPONENT_TYPES = ("activities", "objects", "actions", "roles")


@dataclass(frozen=True)
class SelectionConfig:
    epsilon: float = DEFAULT_EPSILON
    epsilon_overrides: Mapping[str, float] = field(default_factory=dict)
    omega: float = 0.9
    k: Mapping[Kind, int] = field(default_factory=dict)
    tau: Mapping[Kind, float] = field(default_factory=dict)
    default_k: int = 100
    mcs_size_cap: int = DEFAULT_MCS_CAP
    action_matching: str = "syn"
    repair: str = "exact"

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", {Kind(kd): int(v) for kd, v in dict(self.k).items()})
        object.__setattr__(self, "tau", {Kind(kd): float(v) for kd, v in dict(self.tau).items()})
        object.__setattr__(self, "epsilon_overrides", dict(self.epsilon_overrides))
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        for eps in [self.epsilon, *self.epsilon_overrides.values()]:
            if not 0.0 <= eps <= 1.0:
                raise ValueError("epsilon must lie in [0, 1]")
        unknown = set(self.epsilon_overrides) - set(COMPONENT_TYPES)
        if unknown:
            raise ValueError(f"unknown epsilon override(s) {sorted(unknown)}; use {COMPONENT_TYPES}")
        if any(v < 1 for v in self.k.values()) or self.default_k < 1:
            raise ValueError("k must be at least 1")
        if any(not 0.0 <= v <= 1.0 for v in self.tau.values()):
            raise ValueError("tau must lie in [0, 1]")
        both = set(self.k) & set(self.tau)
        if both:
            raise ValueError(f"k and tau are mutually exclusive per kind: {sorted(map(str, both))}")
        if self.mcs_size_cap < 1:
            raise ValueError("mcs_size_cap must be at least 1")
        if self.action_matching not in ("syn", "match"):
            raise ValueError("action_matching must be 'syn' or 'match'")
        if self.repair not in ("exact", "iterative"):
            raise ValueError("repair must be 'exact' or 'iterative'")

    @classmethod
    def top_k(cls, k: int, **kwargs) -> "SelectionConfig":
        return cls(k={kind: k for kind in KIND_ORDER}, **kwargs)

    @classmethod
    def threshold(cls, tau: float, **kwargs) -> "SelectionConfig":
        return cls(tau={kind: tau for kind in KIND_ORDER}, **kwargs)

    def eps(self, component: str) -> float:
        return self.epsilon_overrides.get(component, self.epsilon)

    def strategy_for(self, kind: Kind) -> tuple[str, float]:
        if kind in self.tau:
            return ("tau", self.tau[kind])
        return ("k", self.k.get(kind, self.default_k))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "epsilon_overrides": dict(sorted(self.epsilon_overrides.items())),
            "omega": self.omega,
            "k": {str(kd): v for kd, v in sorted(self.k.items())},
            "tau": {str(kd): v for kd, v in sorted(self.tau.items())},
            "default_k": self.default_k,
            "mcs_size_cap": self.mcs_size_cap,
            "action_matching": self.action_matching,
            "repair": self.repair,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SelectionConfig":
        data = dict(data)
        data["k"] = {Kind(kd): v for kd, v in data.get("k", {}).items()}
        data["tau"] = {Kind(kd): v for kd, v in data.get("tau", {}).items()}
        return cls(**data)


@dataclass(frozen=True)
class ReviewFilter:
    objects: frozenset[str] = frozenset()
    actions: frozenset[str] = frozenset()
    activities: frozenset[str] = frozenset()
    roles: frozenset[str] = frozenset()
    pin: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for name in ("objects", "actions", "activities", "roles"):
            object.__setattr__(self, name, frozenset(normalize_label(x) for x in getattr(self, name)))
        object.__setattr__(self, "pin", frozenset(self.pin))
        for key in self.pin:
            kind, _, components = parse_key(key)
            if self._touches(kind, components):
                raise ValueError(f"pinned constraint {key} is also excluded")

    @property
    def empty(self) -> bool:
        return not (self.objects or self.actions or self.activities or self.roles or self.pin)

    def _activity_excluded(self, activity: str) -> bool:
        if activity in self.activities:
            return True
        for pair in ordered_pairs(activity):
            if pair.object in self.objects or (pair.action and pair.action in self.actions):
                return True
        return False

    def _touches(self, kind: Kind, components: Sequence[Optional[str]]) -> bool:
        if kind is Kind.ACTIVITY:
            return any(self._activity_excluded(a) for a in components)
        if kind is Kind.INTEROBJ:
            return any(o in self.objects for o in components)
        if kind is Kind.INTRAOBJ:
            obj, *actions = components
            return obj in self.objects or any(n in self.actions for n in actions if n)
        activity, role = components
        return self._activity_excluded(activity) or role in self.roles

    def excludes(self, c: FittedConstraint) -> bool:
        return c.key not in self.pin and self._touches(c.kind, c.components)

    def to_dict(self) -> dict:
        return {
            "exclude": {
                "objects": sorted(self.objects),
                "actions": sorted(self.actions),
                "activities": sorted(self.activities),
                "roles": sorted(self.roles),
            },
            "pin": sorted(self.pin),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ReviewFilter":
        unknown = set(data) - {"exclude", "pin"}
        if unknown:
            raise ValueError(f"unknown filter field(s) {sorted(unknown)}")
        exclude = data.get("exclude", {})
        bad = set(exclude) - {"objects", "actions", "activities", "roles"}
        if bad:
            raise ValueError(f"unknown exclusion field(s) {sorted(bad)}")
        return cls(
            objects=frozenset(exclude.get("objects", ())),
            actions=frozenset(exclude.get("actions", ())),
            activities=frozenset(exclude.get("activities", ())),
            roles=frozenset(exclude.get("roles", ())),
            pin=frozenset(data.get("pin", ())),
        )


@dataclass
class LogIndex:
    """Log-side components used for fitting: ``A_L``, ``R_L``, ``O_L`` and ``N_o``."""

    activities: list[str]
    roles: list[str]
    actions: dict[str, list[str]]

    @property
    def objects(self) -> list[str]:
        return sorted(self.actions)

    @classmethod
    def of(cls, log: EventLog) -> "LogIndex":
        activities = sorted(activities_of(log))
        actions: dict[str, set[str]] = {}
        for a in activities:
            for pair in ordered_pairs(a):
                bucket = actions.setdefault(pair.object, set())
                if pair.action:
                    bucket.add(pair.action)
        return cls(activities, sorted(roles_of(log)), {o: sorted(n) for o, n in sorted(actions.items())})


def _matches(provider: SimilarityProvider, x_model: str, candidates: Iterable[str], eps: float):
    out = []
    for x_log in candidates:
        score = provider.sim(x_model, x_log)
        if score > eps:
            out.append((x_log, score))
    return out


def fit_constraints(
    constraints: Iterable[MinedConstraint],
    log: EventLog | LogIndex,
    config: SelectionConfig = SelectionConfig(),
    provider: SimilarityProvider | None = None,
    lexicon: SynonymLexicon | None = None,
) -> list[FittedConstraint]:
    """Instantiate mined constraints with matching log components.

    A mined constraint may yield several fitted constraints, one per matching
    combination of distinct log components.
    """
    provider = provider or LexicalSimilarity()
    lexicon = lexicon or default_lexicon()
    index = log if isinstance(log, LogIndex) else LogIndex.of(log)
    constraints = sorted(constraints, key=lambda c: c.key)

    model_phrases = {p for c in constraints for p in c.params if p}
    log_phrases = set(index.activities) | set(index.roles) | set(index.objects)
    provider.prefetch(sorted(model_phrases | log_phrases))

    eps_act, eps_obj = config.eps("activities"), config.eps("objects")
    eps_role, eps_action = config.eps("roles"), config.eps("actions")
    floor = min(eps_act, eps_obj, eps_role, eps_action if config.action_matching == "match" else 1.0)

    def action_matches(n_model: str, candidates: Sequence[str]):
        if config.action_matching == "match":
            return _matches(provider, n_model, candidates, eps_action)
        return [(n, 1.0) for n in candidates if lexicon.syn(n_model, n)]

    fitted: list[FittedConstraint] = []

    def emit(c: MinedConstraint, components: tuple, sims: list) -> None:
        fitted.append(FittedConstraint(source=c, components=components, sim=tuple(sims), epsilon=floor))

    for c in constraints:
        if c.kind is Kind.ACTIVITY or c.kind is Kind.INTEROBJ:
            pool, eps = (index.activities, eps_act) if c.kind is Kind.ACTIVITY else (index.objects, eps_obj)
            first = _matches(provider, c.params[0], pool, eps)
            if not first:
                continue
            second = _matches(provider, c.params[1], pool, eps)
            for (x, sx), (y, sy) in itertools.product(first, second):
                if x != y:
                    emit(c, (x, y), [((c.params[0], x), sx), ((c.params[1], y), sy)])
        elif c.kind is Kind.INTRAOBJ:
            obj, n1, n2 = c.params
            for o_log, so in _matches(provider, obj, index.objects, eps_obj):
                acts = index.actions[o_log]
                firsts = action_matches(n1, acts)
                if n2 is None:
                    for x, sx in firsts:
                        emit(c, (o_log, x, None), [((obj, o_log), so), ((n1, x), sx)])
                    continue
                for (x, sx), (y, sy) in itertools.product(firsts, action_matches(n2, acts)):
                    if x != y:
                        emit(c, (o_log, x, y), [((obj, o_log), so), ((n1, x), sx), ((n2, y), sy)])
        else:
            activity, role = c.params
            role_hits = _matches(provider, role, index.roles, eps_role)
            if not role_hits:
                continue
            for a_log, sa in _matches(provider, activity, index.activities, eps_act):
                for r_log, sr in role_hits:
                    emit(c, (a_log, r_log), [((activity, a_log), sa), ((role, r_log), sr)])
    return fitted


def relevance(c: FittedConstraint, fitted: Sequence[FittedConstraint], omega: float) -> float:
    """``omega * mean similarity + (1 - omega) * support / max same-kind support``."""
    max_support = max(x.support for x in fitted if x.kind is c.kind)
    return omega * c.avg_sim + (1.0 - omega) * (c.support / max_support)


def score(fitted: Sequence[FittedConstraint], omega: float) -> list[FittedConstraint]:
    max_support: dict[Kind, int] = {}
    for c in fitted:
        max_support[c.kind] = max(max_support.get(c.kind, 0), c.support)
    return [
        dataclasses.replace(
            c, relevance=omega * c.avg_sim + (1.0 - omega) * (c.support / max_support[c.kind])
        )
        for c in fitted
    ]


def _rank(c: FittedConstraint):
    return (-c.relevance, -c.support, c.key, c.source.key)


def deduplicate(fitted: Iterable[FittedConstraint]) -> list[FittedConstraint]:
    """Keep the best-ranked fitted constraint per log-side identity."""
    best: dict[str, FittedConstraint] = {}
    for c in sorted(fitted, key=_rank):
        best.setdefault(c.key, c)
    return sorted(best.values(), key=_rank)


def select(fitted: Iterable[FittedConstraint], config: SelectionConfig) -> list[FittedConstraint]:
    """Top-k or relevance-threshold selection per kind, with deterministic ties."""
    chosen: list[FittedConstraint] = []
    unique = deduplicate(fitted)
    for kind in KIND_ORDER:
        ranked = [c for c in unique if c.kind is kind]
        strategy, value = config.strategy_for(kind)
        if strategy == "tau":
            chosen.extend(c for c in ranked if c.relevance > value)
        else:
            chosen.extend(ranked[: int(value)])
    return chosen


def apply_review(selected: Iterable[FittedConstraint], review: ReviewFilter | None) -> list[FittedConstraint]:
    if review is None or review.empty:
        return list(selected)
    return [c for c in selected if not review.excludes(c)]


def scope_groups(constraints: Iterable[FittedConstraint]) -> dict[str, list[FittedConstraint]]:
    """Consistency scopes: all activity constraints, all inter-object ones, one per object."""
    groups: dict[str, list[FittedConstraint]] = {}
    for c in constraints:
        if c.kind is Kind.ROLE:
            continue
        if c.kind is Kind.INTRAOBJ:
            name = f"intraobj:{c.components[0]}"
        else:
            name = str(c.kind)
        groups.setdefault(name, []).append(c)
    return dict(sorted(groups.items()))


def _cost(removal) -> tuple:
    members = sorted(removal.constraints, key=lambda c: c.key)
    return (round(sum(c.relevance for c in members), 12), len(members), [c.key for c in members])


def _iterative_repair(component: list[FittedConstraint], pinned) -> tuple[set, bool]:
    """Resolve one unsatisfiable core at a time by dropping its least relevant member."""
    removed: set[FittedConstraint] = set()
    current = list(component)
    for core in small_cores(current):
        if core & removed:
            continue
        candidates = [c for c in core if c.key not in pinned]
        if not candidates:
            return removed, False
        victim = min(candidates, key=lambda c: (c.relevance, c.key))
        removed.add(victim)
        current.remove(victim)
    while not is_consistent(current):
        core = [c for c in minimal_unsatisfiable_subset(current) if c.key not in pinned]
        if not core:
            return removed, False
        victim = min(core, key=lambda c: (c.relevance, c.key))
        removed.add(victim)
        current.remove(victim)
    return removed, True


def ensure_consistency(
    selected: Iterable[FittedConstraint],
    config: SelectionConfig = SelectionConfig(),
    review: ReviewFilter | None = None,
) -> tuple[list[FittedConstraint], list[dict]]:
    """Remove, per inconsistent scope, the correction set with the lowest total relevance.

    When no correction set fits within ``config.mcs_size_cap`` the scope is
    left unmodified and reported as unresolved, unless ``config.repair`` is
    ``"iterative"``, in which case cores are resolved one by one.
    Returns the repaired list and one diagnostic per scope that needed work.
    """
    selected = list(selected)
    pinned = review.pin if review else frozenset()
    removed: set[FittedConstraint] = set()
    diagnostics: list[dict] = []
    for name, group in scope_groups(selected).items():
        for component in connected_groups(sorted(group, key=lambda c: c.key)):
            keys = sorted(c.key for c in component)
            try:
                if is_consistent(component):
                    continue
                protected = [c for c in component if c.key in pinned]
                options = minimal_correction_sets(component, config.mcs_size_cap, protected)
                if options:
                    best = min(options, key=_cost)
                    removed |= set(best.constraints)
                    diagnostics.append(
                        {"scope": name, "status": "repaired", "method": "exact",
                         "removed": sorted(c.key for c in best.constraints),
                         "alternatives": len(options)}
                    )
                    continue
                if config.repair == "iterative":
                    dropped, ok = _iterative_repair(component, pinned)
                    if ok:
                        removed |= dropped
                        diagnostics.append(
                            {"scope": name, "status": "repaired", "method": "iterative",
                             "removed": sorted(c.key for c in dropped)}
                        )
                        continue
                reason = f"no correction set within size {config.mcs_size_cap}"
            except StateBudgetExceeded as exc:
                reason = str(exc)
            log.warning("scope %s left unresolved (%d constraints): %s", name, len(keys), reason)
            diagnostics.append({"scope": name, "status": "unresolved", "reason": reason, "constraints": keys})
    kept = [c for c in selected if c not in removed]
    unresolved = {d["scope"] for d in diagnostics if d["status"] == "unresolved"}
    for name, group in scope_groups(kept).items():
        if name not in unresolved and not is_consistent(group):
            raise AssertionError(f"scope {name} still inconsistent after repair")
    return kept, diagnostics


@dataclass
class Selection:
    """Outcome of the selection stage."""

    fitted: list[FittedConstraint]
    recommended: list[FittedConstraint]
    reviewed: list[FittedConstraint]
    selected: list[FittedConstraint]
    diagnostics: list[dict]


def select_constraints(
    constraints: Iterable[MinedConstraint],
    log: EventLog | LogIndex,
    config: SelectionConfig = SelectionConfig(),
    provider: SimilarityProvider | None = None,
    lexicon: SynonymLexicon | None = None,
    review: ReviewFilter | None = None,
    fitted: list[FittedConstraint] | None = None,
) -> Selection:
    """Fit, score, select, review and repair: the whole selection stage."""
    if fitted is None:
        fitted = fit_constraints(constraints, log, config, provider, lexicon)
    scored = score(fitted, config.omega)
    recommended = select(scored, config)
    reviewed = apply_review(recommended, review)
    final, diagnostics = ensure_consistency(reviewed, config, review)
    return Selection(scored, recommended, reviewed, final, diagnostics)
