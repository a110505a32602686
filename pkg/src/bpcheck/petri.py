"""Minimal workflow nets and bounded playout."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

DEFAULT_VARIANT_CAP = 1000
DEFAULT_TOKEN_BOUND = 16
DEFAULT_STEP_BUDGET = 2_000_000


class PlayoutError(ValueError):
    """The net cannot be played out within the configured bounds."""


@dataclass(frozen=True)
class WorkflowNet:
    places: tuple[str, ...]
    transitions: Mapping[str, Optional[str]]  # id -> label, None for silent steps
    arcs: tuple[tuple[str, str], ...]
    initial_marking: Mapping[str, int]
    final_marking: Mapping[str, int]
    _pre: dict = field(init=False, repr=False, compare=False)
    _post: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        places = set(self.places)
        pre: dict[str, dict[str, int]] = {t: {} for t in self.transitions}
        post: dict[str, dict[str, int]] = {t: {} for t in self.transitions}
        for src, dst in self.arcs:
            if src in places and dst in self.transitions:
                pre[dst][src] = pre[dst].get(src, 0) + 1
            elif src in self.transitions and dst in places:
                post[src][dst] = post[src].get(dst, 0) + 1
            else:
                raise ValueError(f"arc {src}->{dst} must connect a place and a transition")
        for marking in (self.initial_marking, self.final_marking):
            unknown = set(marking) - places
            if unknown:
                raise ValueError(f"marking refers to unknown places {sorted(unknown)}")
        object.__setattr__(self, "_pre", pre)
        object.__setattr__(self, "_post", post)

    @property
    def labels(self) -> set[str]:
        return {lbl for lbl in self.transitions.values() if lbl is not None}

    def _freeze(self, marking: Mapping[str, int]) -> tuple[tuple[str, int], ...]:
        return tuple(sorted((p, n) for p, n in marking.items() if n > 0))

    def enabled(self, marking: dict[str, int]) -> list[str]:
        return [
            t
            for t in sorted(self.transitions)
            if all(marking.get(p, 0) >= n for p, n in self._pre[t].items())
        ]

    def fire(self, marking: dict[str, int], transition: str) -> dict[str, int]:
        out = dict(marking)
        for p, n in self._pre[transition].items():
            out[p] -= n
        for p, n in self._post[transition].items():
            out[p] = out.get(p, 0) + n
        return out


def playout(
    net: WorkflowNet,
    loop_bound: int = 1,
    variant_cap: int = DEFAULT_VARIANT_CAP,
    token_bound: int = DEFAULT_TOKEN_BOUND,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> set[tuple[str, ...]]:
    """Label sequences of all complete runs in which no marking recurs more than ``loop_bound`` times.

    Going around a cycle once revisits a marking once, so ``loop_bound=1``
    executes every loop at most once.
    """
    final = net._freeze(net.final_marking)
    variants: set[tuple[str, ...]] = set()
    steps = 0

    start = {p: n for p, n in net.initial_marking.items() if n > 0}
    visits: dict[tuple, int] = {net._freeze(start): 1}
    stack: list[tuple[dict[str, int], tuple[str, ...], list[str]]] = []
    stack.append((start, (), net.enabled(start)))
    path_keys: list[tuple] = [net._freeze(start)]
    while stack:
        marking, trace, todo = stack[-1]
        if net._freeze(marking) == final:
            variants.add(trace)
            if len(variants) > variant_cap:
                raise PlayoutError(f"more than {variant_cap} variants")
            todo.clear()
        if not todo:
            stack.pop()
            key = path_keys.pop()
            visits[key] -= 1
            continue
        steps += 1
        if steps > step_budget:
            raise PlayoutError(f"playout exceeded {step_budget} steps")
        t = todo.pop(0)
        nxt = net.fire(marking, t)
        if any(n > token_bound for n in nxt.values()):
            raise PlayoutError(f"place exceeds {token_bound} tokens; the net looks unbounded")
        key = net._freeze(nxt)
        if visits.get(key, 0) > loop_bound:
            continue
        visits[key] = visits.get(key, 0) + 1
        path_keys.append(key)
        label = net.transitions[t]
        stack.append((nxt, trace + ((label,) if label is not None else ()), net.enabled(nxt)))
    if not variants:
        raise PlayoutError("no run reaches the final marking")
    return variants


def sequence_net(labels: Sequence[str]) -> WorkflowNet:
    """A purely sequential net, handy for tests and fixtures."""
    places = tuple(f"p{i}" for i in range(len(labels) + 1))
    transitions = {f"t{i}": lbl for i, lbl in enumerate(labels)}
    arcs = []
    for i in range(len(labels)):
        arcs.append((f"p{i}", f"t{i}"))
        arcs.append((f"t{i}", f"p{i + 1}"))
    return WorkflowNet(places, transitions, tuple(arcs), {"p0": 1}, {places[-1]: 1})
