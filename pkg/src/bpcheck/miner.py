"""Constraint extraction from model behavior and collection refinement."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .declare import holds_on_all, weaker_than
from .labels import activity_object, actions_on, ordered_pairs, standardize_action, standardize_label
from .model import (
    BINARY_TEMPLATES,
    INTRAOBJ_UNARY,
    Kind,
    MinedConstraint,
    ProcessModel,
    Template,
    normalize_label,
)
from .petri import DEFAULT_VARIANT_CAP, WorkflowNet, playout as _playout

log = logging.getLogger(__name__)


def playout(model, loop_bound: int = 1, variant_cap: int = DEFAULT_VARIANT_CAP) -> set[tuple[str, ...]]:
    """Execution sequences of a model: played out from its net, or its explicit sequences."""
    net = model if isinstance(model, WorkflowNet) else getattr(model, "net", None)
    if net is None:
        return set(model.sequences)
    return _playout(net, loop_bound=loop_bound, variant_cap=variant_cap)


def _binary(kind: Kind, symbols: Sequence[str], sequences: list[tuple], scope: tuple = ()) -> set[MinedConstraint]:
    found = set()
    for x, y in itertools.permutations(sorted(symbols), 2):
        for template in BINARY_TEMPLATES:
            result = holds_on_all(template, (x, y), sequences)
            if result["activated_somewhere"]:
                found.add(MinedConstraint(kind, template, scope + (x, y)))
    return found


def mine_activity_constraints(model: ProcessModel) -> set[MinedConstraint]:
    sequences = sorted(model.sequences)
    if not sequences:
        raise ValueError(f"model {model.id} has no execution sequences")
    return _binary(Kind.ACTIVITY, sorted(model.activities), sequences)


def object_sequence(activities: Iterable[str]) -> tuple[str, ...]:
    """Project an activity sequence onto business objects, dropping object-less steps."""
    out = []
    for a in activities:
        obj = activity_object(a)
        if obj is not None:
            out.append(obj)
    return tuple(out)


def mine_interobject_constraints(model: ProcessModel) -> set[MinedConstraint]:
    projected = sorted({object_sequence(seq) for seq in model.sequences})
    objects = sorted({o for seq in projected for o in seq})
    return _binary(Kind.INTEROBJ, objects, projected)


def action_sequence(activities: Iterable[str], obj: str) -> tuple[str, ...]:
    out: list[str] = []
    for a in activities:
        out.extend(actions_on(a, obj))
    return tuple(out)


def objects_and_actions(activities: Iterable[str]) -> dict[str, set[str]]:
    """Map each business object to the actions applied to it (``O`` and ``N_o``)."""
    result: dict[str, set[str]] = {}
    for a in activities:
        for pair in ordered_pairs(a):
            actions = result.setdefault(pair.object, set())
            if pair.action:
                actions.add(pair.action)
    return result


def project_per_object(sequences: Iterable[Sequence[str]], objects: Iterable[str]) -> dict[str, set[tuple[str, ...]]]:
    sequences = list(sequences)
    return {o: {action_sequence(seq, o) for seq in sequences} for o in objects}


def mine_intraobject_constraints(model: ProcessModel) -> set[MinedConstraint]:
    actions = objects_and_actions(model.activities)
    projections = project_per_object(model.sequences, actions)
    found: set[MinedConstraint] = set()
    for obj in sorted(actions):
        # projections without the object are vacuous for intra-object constraints
        seqs = sorted(s for s in projections[obj] if s)
        if not seqs or not actions[obj]:
            continue
        for n in sorted(actions[obj]):
            for template in INTRAOBJ_UNARY:
                if holds_on_all(template, (n,), seqs)["activated_somewhere"]:
                    found.add(MinedConstraint(Kind.INTRAOBJ, template, (obj, n, None)))
        found |= _binary(Kind.INTRAOBJ, sorted(actions[obj]), seqs, scope=(obj,))
    return found


def mine_role_constraints(model: ProcessModel) -> set[MinedConstraint]:
    return {
        MinedConstraint(Kind.ROLE, Template.ABSENCE, (a, r)) for a, r in sorted(model.role_map.items())
    }


def mine_model(model: ProcessModel) -> set[MinedConstraint]:
    return (
        mine_activity_constraints(model)
        | mine_interobject_constraints(model)
        | mine_intraobject_constraints(model)
        | mine_role_constraints(model)
    )


@dataclass
class ConstraintCollection:
    """Refined constraints keyed by (kind, template, standardized params) with provenance."""

    constraints: dict[str, MinedConstraint] = field(default_factory=dict)
    provenance: dict[str, frozenset[str]] = field(default_factory=dict)

    def __iter__(self):
        return (self.constraints[k] for k in sorted(self.constraints))

    def __len__(self) -> int:
        return len(self.constraints)

    def __contains__(self, key) -> bool:
        return getattr(key, "key", key) in self.constraints

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConstraintCollection):
            return NotImplemented
        return self.constraints == other.constraints and self.provenance == other.provenance

    def of_kind(self, kind: Kind) -> list[MinedConstraint]:
        return [c for c in self if c.kind is kind]

    def per_model(self) -> list[tuple[str, set[MinedConstraint]]]:
        by_model: dict[str, set[MinedConstraint]] = {}
        for key, models in self.provenance.items():
            c = self.constraints[key]
            for m in models:
                by_model.setdefault(m, set()).add(MinedConstraint(c.kind, c.template, c.params))
        return sorted(by_model.items())


def standardize_constraint(c: MinedConstraint) -> Optional[MinedConstraint]:
    """Standardize labels; ``None`` if parameters collapse onto each other."""
    if c.kind is Kind.ACTIVITY:
        params = tuple(standardize_label(p) for p in c.params)
    elif c.kind is Kind.INTEROBJ:
        params = tuple(normalize_label(p) for p in c.params)
    elif c.kind is Kind.INTRAOBJ:
        obj, n1, n2 = c.params
        params = (normalize_label(obj), standardize_action(n1), standardize_action(n2) if n2 else None)
    else:
        params = (standardize_label(c.params[0]), normalize_label(c.params[1]))
    symbols = [p for p in (params[1:] if c.kind is Kind.INTRAOBJ else params[:2]) if p is not None]
    if c.kind is not Kind.ROLE and len(symbols) == 2 and symbols[0] == symbols[1]:
        return None
    return MinedConstraint(c.kind, c.template, params, c.support)


def _scope(c: MinedConstraint) -> tuple:
    return (c.kind, c.params[0]) if c.kind is Kind.INTRAOBJ else (c.kind,)


def refine_collection(per_model) -> ConstraintCollection:
    """Standardize, merge by key with support = #models, and prune subsumed constraints."""
    if isinstance(per_model, ConstraintCollection):
        per_model = per_model.per_model()
    provenance: dict[str, set[str]] = {}
    base: dict[str, MinedConstraint] = {}
    for model_id, constraints in per_model:
        for c in constraints:
            std = standardize_constraint(c)
            if std is None:
                continue
            provenance.setdefault(std.key, set()).add(model_id)
            base.setdefault(std.key, MinedConstraint(std.kind, std.template, std.params))

    merged = {
        k: MinedConstraint(c.kind, c.template, c.params, len(provenance[k])) for k, c in base.items()
    }
    index = {(_scope(c), c.template, c.symbols): c for c in merged.values()}
    redundant: set[str] = set()
    for strong in merged.values():
        for template, params in weaker_than(strong.template, strong.symbols):
            weak = index.get((_scope(strong), template, params))
            if weak is not None and weak.support == strong.support:
                redundant.add(weak.key)
    kept = {k: c for k, c in merged.items() if k not in redundant}
    return ConstraintCollection(
        constraints=dict(sorted(kept.items())),
        provenance={k: frozenset(provenance[k]) for k in sorted(kept)},
    )


def mine_collection(models: Sequence[ProcessModel], jobs: int = 1) -> ConstraintCollection:
    """Mine every model and refine the union into one collection."""
    models = sorted(models, key=lambda m: m.id)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            mined = list(pool.map(mine_model, models))
    else:
        mined = [mine_model(m) for m in models]
    return refine_collection(list(zip((m.id for m in models), mined)))
