"""A deterministic collection of small reference models for tests and evaluation.

Five process domains are rendered in four labelling variants each: plain
``verb object`` labels, ``object participle`` labels, synonym verbs with
renamed roles, and a mix with object aliases and a shortened ending.
Control flow (choices, parallel branches, loops) is encoded in workflow nets
so that playout is exercised too.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .labels import past_participle
from .miner import playout
from .model import ProcessModel
from .petri import WorkflowNet


@dataclass(frozen=True)
class Step:
    verb: str
    obj: str
    role: str


@dataclass(frozen=True)
class Xor:
    branches: tuple


@dataclass(frozen=True)
class And:
    branches: tuple


@dataclass(frozen=True)
class Loop:
    body: tuple


Block = Union[Step, Xor, And, Loop]


def _s(verb, obj, role):
    return Step(verb, obj, role)


DOMAINS: dict[str, tuple] = {
    "o2c": (
        _s("receive", "order", "clerk"),
        _s("check", "order", "clerk"),
        Xor((
            (
                _s("approve", "order", "manager"),
                And(((_s("ship", "goods", "warehouse"),), (_s("send", "invoice", "accountant"),))),
                _s("receive", "payment", "accountant"),
            ),
            (_s("reject", "order", "manager"), _s("notify", "customer", "clerk")),
        )),
        _s("archive", "order", "clerk"),
    ),
    "p2p": (
        _s("create", "requisition", "employee"),
        Loop((_s("review", "requisition", "manager"),)),
        Xor((
            (
                _s("approve", "requisition", "manager"),
                _s("create", "purchase order", "buyer"),
                _s("send", "purchase order", "buyer"),
                _s("receive", "goods", "warehouse"),
                _s("enter", "invoice", "accountant"),
                _s("pay", "invoice", "accountant"),
            ),
            (_s("reject", "requisition", "manager"),),
        )),
    ),
    "claims": (
        _s("register", "claim", "agent"),
        _s("check", "claim", "adjuster"),
        Xor((
            (_s("approve", "claim", "manager"), _s("pay", "claim", "accountant")),
            (_s("reject", "claim", "manager"),),
        )),
        _s("notify", "customer", "agent"),
        _s("close", "claim", "agent"),
    ),
    "hiring": (
        _s("create", "job posting", "recruiter"),
        _s("receive", "application", "recruiter"),
        Loop((_s("evaluate", "application", "recruiter"),)),
        And(((_s("check", "references", "recruiter"),), (_s("schedule", "interview", "manager"),))),
        Xor(((_s("send", "offer", "recruiter"),), (_s("send", "rejection", "recruiter"),))),
        _s("archive", "application", "recruiter"),
    ),
    "expenses": (
        _s("submit", "expense report", "employee"),
        _s("check", "expense report", "controller"),
        Xor((
            (_s("approve", "expense report", "manager"), _s("reimburse", "expense report", "accountant")),
            (_s("reject", "expense report", "manager"), _s("notify", "employee", "controller")),
        )),
        _s("archive", "expense report", "controller"),
    ),
}

SYNONYM_VERBS = {
    "check": "examine",
    "approve": "authorize",
    "reject": "decline",
    "create": "generate",
    "send": "transmit",
    "pay": "settle",
    "notify": "inform",
    "archive": "store",
    "review": "inspect",
}

ROLE_ALIASES = {
    "clerk": "sales clerk",
    "manager": "department manager",
    "accountant": "accounting clerk",
    "employee": "staff member",
    "agent": "claims agent",
}

OBJECT_ALIASES = {
    "order": "customer order",
    "requisition": "purchase requisition",
    "claim": "insurance claim",
    "application": "job application",
    "expense report": "expense statement",
}

VARIANTS = ("plain", "participle", "synonym", "mixed")


def render(step: Step, variant: str, position: int) -> tuple[str, str]:
    """Activity label and role of a step under a labelling variant."""
    verb, obj, role = step.verb, step.obj, step.role
    if variant == "synonym":
        verb = SYNONYM_VERBS.get(verb, verb)
        role = ROLE_ALIASES.get(role, role)
    if variant == "mixed":
        obj = OBJECT_ALIASES.get(obj, obj)
    participle = variant == "participle" or (variant == "mixed" and position % 2 == 1)
    label = f"{obj} {past_participle(verb)}" if participle else f"{verb} {obj}"
    return label, role


def _truncate(blocks: tuple) -> tuple:
    # the mixed variant ends one step earlier when the process ends in a plain step
    if len(blocks) > 2 and isinstance(blocks[-1], Step):
        return blocks[:-1]
    return blocks


class _NetBuilder:
    def __init__(self, variant: str):
        self.variant = variant
        self.places: list[str] = []
        self.transitions: dict[str, str | None] = {}
        self.arcs: list[tuple[str, str]] = []
        self.labels: dict[str, str] = {}  # label -> role
        self.steps = 0

    def place(self) -> str:
        p = f"p{len(self.places)}"
        self.places.append(p)
        return p

    def transition(self, label, src: list[str], dst: list[str]) -> None:
        t = f"t{len(self.transitions)}"
        self.transitions[t] = label
        self.arcs.extend((p, t) for p in src)
        self.arcs.extend((t, p) for p in dst)

    def chain(self, blocks, p_in: str, p_out: str) -> None:
        current = p_in
        for i, block in enumerate(blocks):
            nxt = p_out if i == len(blocks) - 1 else self.place()
            self.block(block, current, nxt)
            current = nxt

    def block(self, block: Block, p_in: str, p_out: str) -> None:
        if isinstance(block, Step):
            label, role = render(block, self.variant, self.steps)
            self.steps += 1
            self.labels[label] = role
            self.transition(label, [p_in], [p_out])
        elif isinstance(block, Xor):
            for branch in block.branches:
                self.chain(branch, p_in, p_out)
        elif isinstance(block, And):
            starts = [self.place() for _ in block.branches]
            ends = [self.place() for _ in block.branches]
            self.transition(None, [p_in], starts)
            for branch, s, e in zip(block.branches, starts, ends):
                self.chain(branch, s, e)
            self.transition(None, ends, [p_out])
        else:
            mid = self.place()
            self.chain(block.body, p_in, mid)
            self.transition(None, [mid], [p_out])
            self.transition(None, [mid], [p_in])


def build_model(domain: str, variant: str) -> ProcessModel:
    blocks = DOMAINS[domain]
    if variant == "mixed":
        blocks = _truncate(blocks)
    builder = _NetBuilder(variant)
    start, end = builder.place(), builder.place()
    builder.chain(blocks, start, end)
    net = WorkflowNet(
        places=tuple(builder.places),
        transitions=dict(builder.transitions),
        arcs=tuple(builder.arcs),
        initial_marking={start: 1},
        final_marking={end: 1},
    )
    return ProcessModel(
        id=f"{domain}-{variant}",
        activities=frozenset(builder.labels),
        sequences=frozenset(playout(net)),
        roles=frozenset(builder.labels.values()),
        role_map=dict(builder.labels),
        net=net,
    )


def synthetic_collection() -> list[ProcessModel]:
    """The 20-model collection, sorted by id."""
    return sorted(
        (build_model(domain, variant) for domain in DOMAINS for variant in VARIANTS),
        key=lambda m: m.id,
    )
