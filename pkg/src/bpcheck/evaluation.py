"""Log generation, noise injection, ground truth, scoring and cross-validation."""
from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .checker import check_log
from .labels import standardize_action, standardize_label
from .miner import mine_collection, mine_model
from .model import (
    KIND_ORDER,
    Event,
    EventLog,
    Kind,
    ProcessModel,
    Trace,
    constraint_key,
    identity_fit,
    normalize_label,
    parse_key,
)
from .selector import SelectionConfig, fit_constraints, select_constraints
from .similarity import LexicalSimilarity, SimilarityProvider

LOG_SIZE = 100
MAX_REPEATS = 10

METRIC_COLUMNS = ("fold", "model_id", "kind", "k", "tau", "omega", "tp", "fp", "fn", "precision", "recall")


def generate_log(model: ProcessModel, seed: int, size: int = LOG_SIZE) -> EventLog:
    """One trace per variant, cycled in a seeded order until ``size`` traces exist."""
    variants = sorted(model.sequences)
    if not variants:
        raise ValueError(f"model {model.id} has no execution sequences")
    order = list(variants)
    random.Random(seed).shuffle(order)
    count = max(size, len(variants))
    width = len(str(count))
    traces = []
    for i in range(count):
        seq = variants[i] if i < len(variants) else order[i % len(order)]
        events = tuple(Event(a, model.role_map.get(a)) for a in seq)
        traces.append(Trace(f"{model.id}#{i + 1:0{width}d}", events))
    return EventLog(tuple(traces))


@dataclass(frozen=True)
class MutationRecord:
    """Operations applied to one trace, in order.

    Each operation is one of ``("insert", pos, activity, role)``,
    ``("remove", pos)``, ``("swap", i, j)`` or ``("reassign_role", pos, role)``.
    """

    case_id: str
    operations: tuple[tuple, ...]


def apply_operation(events: list[Event], op: tuple) -> list[Event]:
    events = list(events)
    name = op[0]
    if name == "insert":
        _, pos, activity, role = op
        events.insert(pos, Event(activity, role))
    elif name == "remove":
        del events[op[1]]
    elif name == "swap":
        _, i, j = op
        events[i], events[j] = events[j], events[i]
    elif name == "reassign_role":
        _, pos, role = op
        events[pos] = Event(events[pos].activity, role)
    else:
        raise ValueError(f"unknown mutation {name!r}")
    return events


def replay(records: Iterable[MutationRecord], clean: EventLog) -> EventLog:
    by_case = {r.case_id: r for r in records}
    traces = []
    for trace in clean:
        events = list(trace.events)
        record = by_case.get(trace.case_id)
        for op in record.operations if record else ():
            events = apply_operation(events, op)
        traces.append(Trace(trace.case_id, tuple(events)))
    return EventLog(tuple(traces))


def _draw(rng: random.Random, events: list[Event], activities: list[str], roles: list[Optional[str]],
          role_map: dict) -> tuple:
    while True:
        op = rng.choice(("insert", "remove", "swap", "reassign_role"))
        if op == "insert":
            activity = rng.choice(activities)
            return ("insert", rng.randint(0, len(events)), activity, role_map.get(activity))
        if op in ("remove", "swap") and len(events) < 2:
            continue
        if op == "remove":
            return ("remove", rng.randrange(len(events)))
        if op == "swap":
            i, j = sorted(rng.sample(range(len(events)), 2))
            return ("swap", i, j)
        pos = rng.randrange(len(events))
        options = [r for r in roles if r != events[pos].role]
        if not options:
            continue
        return ("reassign_role", pos, rng.choice(options))


def inject_noise(
    log: EventLog,
    seed: int,
    p_trace: float = 0.5,
    p_repeat: float = 0.5,
    model: ProcessModel | None = None,
    max_repeats: int = MAX_REPEATS,
) -> tuple[EventLog, list[MutationRecord]]:
    """Randomly insert, remove, swap or re-assign events; returns the noisy log and its records.

    Inserted activities and replacement roles come from ``model`` when given,
    else from the log itself.
    """
    if len(log) == 0:
        raise ValueError("cannot inject noise into an empty log")
    if not (0.0 <= p_trace <= 1.0 and 0.0 <= p_repeat <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if model is not None:
        activities = sorted(model.activities)
        role_set = set(model.roles)
        role_map = dict(model.role_map)
    else:
        activities = sorted({e.activity for t in log for e in t.events})
        role_set = {e.role for t in log for e in t.events if e.role is not None}
        role_map = {}
    roles: list[Optional[str]] = [None, *sorted(role_set)]
    rng = random.Random(seed)
    records = []
    traces = []
    for trace in log:
        events = list(trace.events)
        ops: list[tuple] = []
        if rng.random() < p_trace:
            while True:
                op = _draw(rng, events, activities, roles, role_map)
                events = apply_operation(events, op)
                ops.append(op)
                if len(ops) > max_repeats or rng.random() >= p_repeat:
                    break
        if ops:
            records.append(MutationRecord(trace.case_id, tuple(ops)))
        traces.append(Trace(trace.case_id, tuple(events)))
    return EventLog(tuple(traces)), records


def standard_key(c) -> str:
    """Label-standardized identity used to match detected against true violations."""
    components = getattr(c, "components", None) or c.params
    if c.kind is Kind.ACTIVITY:
        params = tuple(standardize_label(a) for a in components)
    elif c.kind is Kind.INTEROBJ:
        params = tuple(normalize_label(o) for o in components)
    elif c.kind is Kind.INTRAOBJ:
        obj, n1, n2 = components
        params = (normalize_label(obj), standardize_action(n1), standardize_action(n2) if n2 else None)
    else:
        params = (standardize_label(components[0]), normalize_label(components[1]))
    return constraint_key(c.kind, c.template, params)


def violation_pairs(violations) -> set[tuple[str, str]]:
    return {(v.trace_ref, standard_key(v.constraint)) for v in violations}


def own_constraints(model: ProcessModel):
    """Constraints mined from one model with its own labels, fitted to themselves."""
    return [identity_fit(c) for c in sorted(mine_model(model), key=lambda c: c.key)]


def ground_truth_violations(model: ProcessModel, noisy_log: EventLog) -> set[tuple[str, str]]:
    return violation_pairs(check_log(noisy_log, own_constraints(model)))


@dataclass(frozen=True)
class EvalRecord:
    kind: str
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> Optional[float]:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None


def _kind_of(pair: tuple[str, str]) -> str:
    return str(parse_key(pair[1])[0])


def score(detected: set, truth: set) -> dict[str, EvalRecord]:
    """TP/FP/FN per constraint kind and over all kinds (``"all"``)."""
    out = {}
    for kind in [*(str(k) for k in KIND_ORDER), "all"]:
        d = {p for p in detected if kind == "all" or _kind_of(p) == kind}
        v = {p for p in truth if kind == "all" or _kind_of(p) == kind}
        out[kind] = EvalRecord(kind, len(d & v), len(d - v), len(v - d))
    return out


def fold_partition(ids: Sequence[str], folds: int, seed: int) -> list[list[str]]:
    if folds < 2 or folds > len(ids):
        raise ValueError(f"folds must lie in [2, {len(ids)}]")
    order = sorted(ids)
    random.Random(seed).shuffle(order)
    return [sorted(order[i::folds]) for i in range(folds)]


def _model_seed(seed: int, model_id: str) -> int:
    return random.Random(f"{seed}:{model_id}").getrandbits(63)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.6f}"


def _strategy(config: SelectionConfig, kind: Kind) -> tuple[str, str]:
    strategy, value = config.strategy_for(kind)
    return (str(value), "") if strategy == "k" else ("", f"{value:g}")


def cross_validate(
    models: Sequence[ProcessModel],
    folds: int = 5,
    seed: int = 0,
    configs: Sequence[SelectionConfig] = (SelectionConfig(),),
    provider_factory: Callable[[], SimilarityProvider] = LexicalSimilarity,
    jobs: int = 1,
) -> list[dict]:
    """Per (fold, held-out model, config, kind) metric rows in the metrics-CSV layout."""
    by_id = {m.id: m for m in models}
    if len(by_id) != len(models):
        raise ValueError("model ids must be unique")
    rows = []
    provider = provider_factory()
    for f, held_out in enumerate(fold_partition(list(by_id), folds, seed)):
        train = [by_id[i] for i in sorted(by_id) if i not in held_out]
        collection = mine_collection(train, jobs=jobs)
        for model_id in held_out:
            model = by_id[model_id]
            model_seed = _model_seed(seed, model_id)
            clean = generate_log(model, model_seed)
            noisy, _ = inject_noise(clean, model_seed, model=model)
            truth = ground_truth_violations(model, noisy)
            fitted_cache: dict[tuple, list] = {}
            for config in configs:
                fit_key = (config.epsilon, tuple(sorted(config.epsilon_overrides.items())), config.action_matching)
                if fit_key not in fitted_cache:
                    fitted_cache[fit_key] = fit_constraints(collection, noisy, config, provider)
                result = select_constraints(collection, noisy, config, fitted=fitted_cache[fit_key])
                detected = violation_pairs(check_log(noisy, result.selected))
                for kind, record in score(detected, truth).items():
                    if kind == "all":
                        labels = {_strategy(config, kd) for kd in KIND_ORDER}
                        k_val, tau_val = labels.pop() if len(labels) == 1 else ("mixed", "mixed")
                    else:
                        k_val, tau_val = _strategy(config, Kind(kind))
                    rows.append(
                        {
                            "fold": f,
                            "model_id": model_id,
                            "kind": kind,
                            "k": k_val,
                            "tau": tau_val,
                            "omega": f"{config.omega:g}",
                            "tp": record.tp,
                            "fp": record.fp,
                            "fn": record.fn,
                            "precision": _fmt(record.precision),
                            "recall": _fmt(record.recall),
                        }
                    )
    return rows


def _mean(values: list[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def summarize(rows: Iterable[dict]) -> list[dict]:
    """Average metrics per (kind, k, tau, omega) across logs and folds.

    Undefined precision or recall values are left out of the averages and
    counted in ``undefined_precision`` / ``undefined_recall``.
    """
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["kind"], r["k"], r["tau"], r["omega"]), []).append(r)
    order = {str(k): i for i, k in enumerate(KIND_ORDER)}
    order["all"] = len(order)
    out = []
    for (kind, k, tau, omega), rs in sorted(groups.items(), key=lambda kv: (order[kv[0][0]], kv[0][1:])):
        precisions = [float(r["precision"]) for r in rs if r["precision"] != ""]
        recalls = [float(r["recall"]) for r in rs if r["recall"] != ""]
        out.append(
            {
                "kind": kind,
                "k": k,
                "tau": tau,
                "omega": omega,
                "logs": len(rs),
                "tp": sum(r["tp"] for r in rs),
                "fp": sum(r["fp"] for r in rs),
                "fn": sum(r["fn"] for r in rs),
                "precision": _fmt(_mean(precisions)),
                "recall": _fmt(_mean(recalls)),
                "undefined_precision": len(rs) - len(precisions),
                "undefined_recall": len(rs) - len(recalls),
            }
        )
    return out


def rows_to_csv(rows: Iterable[dict], columns: Sequence[str] = METRIC_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()
