"""Readers and writers for logs, models, constraint collections, selections, filters and reports."""
from __future__ import annotations

import csv
import json
import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .checker import ViolationReport
from .miner import ConstraintCollection, playout
from .model import (
    PARAM_NAMES,
    Event,
    EventLog,
    FittedConstraint,
    Kind,
    MinedConstraint,
    ProcessModel,
    Template,
    Trace,
    normalize_label,
)
from .petri import DEFAULT_VARIANT_CAP, PlayoutError, WorkflowNet
from .selector import ReviewFilter, SelectionConfig


logger = logging.getLogger(__name__)


class DataError(ValueError):
    """A file exists but its content is malformed."""


class ModelPlayoutError(DataError):
    """A model's net cannot be played out within the configured bounds."""


def meta(seed: Optional[int] = None, config: Optional[dict] = None, **extra) -> dict:
    """Reproducibility header embedded in every output file."""
    block = {"tool": "bpcheck", "version": __version__, "seed": seed, "config": config or {}}
    block.update(extra)
    return block


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


# -- logs ----------------------------------------------------------------------

def _xes_attr(elem, key: str) -> Optional[str]:
    for child in elem:
        if child.tag.rsplit("}", 1)[-1] == "string" and child.get("key") == key:
            return child.get("value")
    return None


def _local(elem) -> str:
    return elem.tag.rsplit("}", 1)[-1]


def _event(activity: str, role: Optional[str]) -> Event:
    # labels are compared in normalized form from ingestion on
    role = normalize_label(role) if role else None
    return Event(normalize_label(activity), role or None)


def read_xes(path) -> EventLog:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise DataError(f"{path}:{line}:{col}: malformed XML") from None
    if _local(root) != "log":
        raise DataError(f"{path}: root element must be <log>, found <{_local(root)}>")
    traces = []
    for t_index, trace in enumerate((c for c in root if _local(c) == "trace"), 1):
        case_id = _xes_attr(trace, "concept:name") or f"trace-{t_index}"
        events = []
        for e_index, event in enumerate((c for c in trace if _local(c) == "event"), 1):
            activity = _xes_attr(event, "concept:name")
            if not activity:
                raise DataError(f"{path}: trace {t_index} event {e_index} lacks a concept:name")
            events.append(_event(activity, _xes_attr(event, "org:role")))
        traces.append(Trace(case_id, tuple(events)))
    return EventLog(tuple(traces))


def read_csv(path) -> EventLog:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        missing = {"case_id", "activity"} - set(columns)
        if missing:
            raise DataError(f"{path}:1: missing required column(s) {sorted(missing)}")
        rows: dict[str, list] = {}
        for n, row in enumerate(reader, 2):
            if None in row or any(v is None for v in row.values()):
                raise DataError(f"{path}:{n}: wrong number of fields")
            case_id, activity = row["case_id"].strip(), row["activity"].strip()
            if not case_id or not activity:
                raise DataError(f"{path}:{n}: empty case_id or activity")
            role = (row.get("role") or "").strip() or None
            stamp = (row.get("timestamp") or "").strip()
            rows.setdefault(case_id, []).append((stamp, n, _event(activity, role)))
    has_time = "timestamp" in columns
    traces = []
    for case_id, events in rows.items():
        if has_time:
            # ISO-8601 stamps sort chronologically as strings; file order breaks ties
            events = sorted(events, key=lambda e: (e[0], e[1]))
        traces.append(Trace(case_id, tuple(e for _, _, e in events)))
    return EventLog(tuple(traces))


def read_log(path) -> EventLog:
    suffix = Path(path).suffix.lower()
    if suffix == ".xes":
        return read_xes(path)
    if suffix == ".csv":
        return read_csv(path)
    raise DataError(f"{path}: unsupported log format {suffix!r}; use .xes or .csv")


def write_xes(log: EventLog, path) -> None:
    root = ET.Element("log", {"xes.version": "1.0"})
    for trace in log:
        t = ET.SubElement(root, "trace")
        ET.SubElement(t, "string", {"key": "concept:name", "value": trace.case_id})
        for event in trace.events:
            e = ET.SubElement(t, "event")
            ET.SubElement(e, "string", {"key": "concept:name", "value": event.activity})
            if event.role is not None:
                ET.SubElement(e, "string", {"key": "org:role", "value": event.role})
    ET.indent(root)
    _write_text(path, ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n")


def write_csv(log: EventLog, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["case_id", "activity", "role"])
        for trace in log:
            for event in trace.events:
                writer.writerow([trace.case_id, event.activity, event.role or ""])


def write_log(log: EventLog, path) -> None:
    if Path(path).suffix.lower() == ".xes":
        write_xes(log, path)
    else:
        write_csv(log, path)


# -- models --------------------------------------------------------------------

_MODEL_FIELDS = {"id", "activities", "roles", "role_map", "sequences", "net"}


def _net_from_json(data: dict, where: str) -> WorkflowNet:
    try:
        transitions = {
            t["id"]: normalize_label(t["label"]) if t.get("label") else None for t in data["transitions"]
        }
        return WorkflowNet(
            places=tuple(data["places"]),
            transitions=transitions,
            arcs=tuple(tuple(a) for a in data["arcs"]),
            initial_marking=dict(data["initial_marking"]),
            final_marking=dict(data["final_marking"]),
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"{where}: malformed net: missing or invalid {exc}") from None
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None


def model_from_json(data: dict, where: str = "<model>", loop_bound: int = 1,
                    variant_cap: int = DEFAULT_VARIANT_CAP) -> ProcessModel:
    if not isinstance(data, dict):
        raise DataError(f"{where}: a model must be a JSON object")
    unknown = set(data) - _MODEL_FIELDS
    if unknown:
        raise DataError(f"{where}: unknown field(s) {sorted(unknown)}")
    for name in ("id", "activities"):
        if name not in data:
            raise DataError(f"{where}: missing field {name!r}")
    if ("sequences" in data) == ("net" in data):
        raise DataError(f"{where}: exactly one of 'sequences' or 'net' is required")
    net = None
    if "net" in data:
        net = _net_from_json(data["net"], where)
        try:
            sequences = playout(net, loop_bound=loop_bound, variant_cap=variant_cap)
        except PlayoutError as exc:
            raise ModelPlayoutError(f"{where}: {exc}") from None
    else:
        sequences = {tuple(s) for s in data["sequences"]}
    try:
        return ProcessModel(
            id=str(data["id"]),
            activities=frozenset(normalize_label(a) for a in data["activities"]),
            sequences=frozenset(tuple(normalize_label(a) for a in s) for s in sequences),
            roles=frozenset(normalize_label(r) for r in data.get("roles", ())),
            role_map={normalize_label(a): normalize_label(r) for a, r in data.get("role_map", {}).items()},
            net=net,
        )
    except (ValueError, TypeError, AttributeError) as exc:
        raise DataError(f"{where}: {exc}") from None


def read_model(path, loop_bound: int = 1, variant_cap: int = DEFAULT_VARIANT_CAP) -> ProcessModel:
    return model_from_json(_load_json(path), str(path), loop_bound, variant_cap)


def read_models(directory) -> list[ProcessModel]:
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise DataError(f"{directory}: no *.json model files found")
    models = []
    for p in paths:
        try:
            models.append(read_model(p))
        except ModelPlayoutError as exc:
            # pathological nets are left out of the collection rather than aborting mining
            logger.warning("skipping model: %s", exc)
    if not models:
        raise DataError(f"{directory}: no model could be played out")
    ids = [m.id for m in models]
    if len(set(ids)) != len(ids):
        raise DataError(f"{directory}: duplicate model ids")
    return models


def model_to_json(model: ProcessModel) -> dict:
    data = {
        "id": model.id,
        "activities": sorted(model.activities),
        "roles": sorted(model.roles),
        "role_map": dict(sorted(model.role_map.items())),
    }
    net = model.net
    if net is None:
        data["sequences"] = [list(s) for s in sorted(model.sequences)]
    else:
        data["net"] = {
            "places": list(net.places),
            "transitions": [{"id": t, "label": lbl} for t, lbl in sorted(net.transitions.items())],
            "arcs": [list(a) for a in net.arcs],
            "initial_marking": dict(sorted(net.initial_marking.items())),
            "final_marking": dict(sorted(net.final_marking.items())),
        }
    return data


def write_model(model: ProcessModel, path) -> None:
    _write_text(path, _dump(model_to_json(model)))


# -- constraints ---------------------------------------------------------------

def _params_dict(kind: Kind, params) -> dict:
    return dict(zip(PARAM_NAMES[kind], params))


def constraint_from_json(data: dict, where: str = "<constraint>") -> MinedConstraint:
    try:
        kind = Kind(data["kind"])
    except (KeyError, ValueError):
        raise DataError(f"{where}: unknown or missing kind {data.get('kind')!r}") from None
    try:
        template = Template(data["template"])
    except (KeyError, ValueError):
        raise DataError(f"{where}: unknown or missing template {data.get('template')!r}") from None
    params = data.get("params")
    if not isinstance(params, dict) or set(params) - set(PARAM_NAMES[kind]):
        raise DataError(f"{where}: params must be an object with keys {PARAM_NAMES[kind]}")
    support = data.get("support", 1)
    try:
        return MinedConstraint(kind, template, tuple(params.get(n) for n in PARAM_NAMES[kind]), support)
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None


def constraint_to_json(c: MinedConstraint) -> dict:
    return {
        "kind": str(c.kind),
        "template": str(c.template),
        "params": _params_dict(c.kind, c.params),
        "support": c.support,
    }


def dumps_constraints(collection: ConstraintCollection, header: Optional[dict] = None) -> str:
    lines = []
    if header is not None:
        lines.append(json.dumps({"meta": header}, sort_keys=True, ensure_ascii=False))
    for c in collection:
        record = constraint_to_json(c)
        record["provenance"] = sorted(collection.provenance.get(c.key, ()))
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def write_constraints(collection: ConstraintCollection, path, header: Optional[dict] = None) -> None:
    _write_text(path, dumps_constraints(collection, header))


def loads_constraints(text: str, where: str = "<constraints>") -> tuple[ConstraintCollection, dict]:
    constraints, provenance, header = {}, {}, {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}:{n}: invalid JSON: {exc.msg}") from None
        if not isinstance(record, dict):
            raise DataError(f"{where}:{n}: expected a JSON object")
        if "meta" in record and len(record) == 1:
            header = record["meta"]
            continue
        c = constraint_from_json(record, f"{where}:{n}")
        if c.key in constraints:
            raise DataError(f"{where}:{n}: duplicate constraint {c.key}")
        constraints[c.key] = c
        provenance[c.key] = frozenset(record.get("provenance", ()))
    collection = ConstraintCollection(
        dict(sorted(constraints.items())), {k: provenance[k] for k in sorted(provenance)}
    )
    return collection, header


def read_constraints(path) -> ConstraintCollection:
    with open(path, encoding="utf-8") as fh:
        return loads_constraints(fh.read(), str(path))[0]


# -- selected sets -------------------------------------------------------------

def fitted_to_json(c: FittedConstraint) -> dict:
    return {
        "kind": str(c.kind),
        "template": str(c.template),
        "components": _params_dict(c.kind, c.components),
        "source": constraint_to_json(c.source),
        "sim": [[m, lg, s] for (m, lg), s in c.sim],
        "relevance": c.relevance,
        "epsilon": c.epsilon,
    }


def fitted_from_json(data: dict, where: str = "<selected>") -> FittedConstraint:
    try:
        source = constraint_from_json(data["source"], where)
        names = PARAM_NAMES[source.kind]
        if data["kind"] != str(source.kind) or data["template"] != str(source.template):
            raise DataError(f"{where}: kind/template differ from the source constraint")
        components = tuple(data["components"].get(n) for n in names)
        sim = tuple(((m, lg), float(s)) for m, lg, s in data["sim"])
        return FittedConstraint(source, components, sim, float(data["relevance"]), float(data["epsilon"]))
    except (KeyError, TypeError) as exc:
        raise DataError(f"{where}: malformed fitted constraint ({exc})") from None
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None


def selection_to_json(selected: Iterable[FittedConstraint], diagnostics: list, header: dict) -> dict:
    return {
        "meta": header,
        "constraints": [fitted_to_json(c) for c in selected],
        "diagnostics": diagnostics,
    }


def write_selection(selected, diagnostics, path, header: dict) -> None:
    _write_text(path, _dump(selection_to_json(selected, diagnostics, header)))


def read_selection(path) -> tuple[list[FittedConstraint], list, dict]:
    data = _load_json(path)
    if not isinstance(data, dict) or "constraints" not in data:
        raise DataError(f"{path}: expected an object with a 'constraints' list")
    selected = [fitted_from_json(c, f"{path}: constraint {i}") for i, c in enumerate(data["constraints"], 1)]
    return selected, list(data.get("diagnostics", [])), dict(data.get("meta", {}))


# -- filters and reports -------------------------------------------------------

def write_filter(review: ReviewFilter, path) -> None:
    _write_text(path, _dump(review.to_dict()))


def read_filter(path) -> ReviewFilter:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise DataError(f"{path}: a filter must be a JSON object")
    try:
        return ReviewFilter.from_dict(data)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_report(report: ViolationReport, path, header: Optional[dict] = None) -> None:
    data = report.to_dict()
    data["meta"] = header or {}
    _write_text(path, _dump(data))


def read_report(path) -> ViolationReport:
    data = _load_json(path)
    try:
        return ViolationReport.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed report ({exc})") from None


def config_from_json(path) -> SelectionConfig:
    try:
        return SelectionConfig.from_dict(_load_json(path))
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None
