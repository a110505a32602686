"""Deterministic automata for Declare constraints, quasi-consistency and correction sets.

A group is quasi-consistent when every member can be activated by some finite
word that satisfies the whole group.  Words range over the group's symbols
plus :data:`OTHER`, which stands for any activity the group does not mention.
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .declare import AT_START, activation_symbols
from .model import Template

log = logging.getLogger(__name__)

OTHER = "⊤other"
DEFAULT_MCS_CAP = 3
DEFAULT_STATE_BUDGET = 250_000

T = Template

# Transition tables over symbol classes: "a" (first parameter), "b" (second
# parameter) and "o" (anything else, always a self-loop).
_BASE: dict[Template, tuple[dict[int, dict[str, int]], int, frozenset[int]]] = {
    T.AT_LEAST_ONE: ({0: {"a": 1}, 1: {"a": 1}}, 0, frozenset({1})),
    T.AT_MOST_ONE: ({0: {"a": 1}, 1: {"a": 2}, 2: {"a": 2}}, 0, frozenset({0, 1})),
    T.ABSENCE: ({0: {"a": 1}, 1: {"a": 1}}, 0, frozenset({0})),
    # 0: no a yet, 1: a without b, 2: b seen
    T.RESPONDED_EXISTENCE: (
        {0: {"a": 1, "b": 2}, 1: {"a": 1, "b": 2}, 2: {"a": 2, "b": 2}},
        0,
        frozenset({0, 2}),
    ),
    # 0: nothing pending, 1: awaiting b
    T.RESPONSE: ({0: {"a": 1, "b": 0}, 1: {"a": 1, "b": 0}}, 0, frozenset({0})),
    # 2: a repeated while awaiting b
    T.ALTERNATE_RESPONSE: (
        {0: {"a": 1, "b": 0}, 1: {"a": 2, "b": 0}, 2: {"a": 2, "b": 2}},
        0,
        frozenset({0}),
    ),
    # 0: no a yet, 1: a seen, 2: b before any a
    T.PRECEDENCE: (
        {0: {"a": 1, "b": 2}, 1: {"a": 1, "b": 1}, 2: {"a": 2, "b": 2}},
        0,
        frozenset({0, 1}),
    ),
    # 0: not armed, 1: armed by an a since the last b, 2: unarmed b
    T.ALTERNATE_PRECEDENCE: (
        {0: {"a": 1, "b": 2}, 1: {"a": 1, "b": 0}, 2: {"a": 2, "b": 2}},
        0,
        frozenset({0, 1}),
    ),
    # bit 0: a seen, bit 1: b seen
    T.CO_EXISTENCE: (
        {0: {"a": 1, "b": 2}, 1: {"a": 1, "b": 3}, 2: {"a": 3, "b": 2}, 3: {"a": 3, "b": 3}},
        0,
        frozenset({0, 3}),
    ),
    T.NOT_CO_EXISTENCE: (
        {0: {"a": 1, "b": 2}, 1: {"a": 1, "b": 3}, 2: {"a": 3, "b": 2}, 3: {"a": 3, "b": 3}},
        0,
        frozenset({0, 1, 2}),
    ),
}

_CONJUNCTIONS = {
    T.EXACTLY_ONE: (T.AT_LEAST_ONE, T.AT_MOST_ONE),
    T.SUCCESSION: (T.RESPONSE, T.PRECEDENCE),
    T.ALTERNATE_SUCCESSION: (T.ALTERNATE_RESPONSE, T.ALTERNATE_PRECEDENCE),
}


def _table(template: Template):
    if template in _BASE:
        return _BASE[template]
    left, right = _CONJUNCTIONS[template]
    lt, l0, lacc = _table(left)
    rt, r0, racc = _table(right)
    table = {}
    for ls, rs in itertools.product(lt, rt):
        table[(ls, rs)] = {
            c: (lt[ls].get(c, ls), rt[rs].get(c, rs)) for c in ("a", "b")
        }
    accepting = frozenset((x, y) for x in lacc for y in racc)
    return table, (l0, r0), accepting


@dataclass(frozen=True)
class ConstraintAutomaton:
    alphabet: tuple[str, ...]
    states: tuple[Hashable, ...]
    initial: Hashable
    transitions: dict
    accepting: frozenset
    activating: frozenset

    def step(self, state, symbol: str):
        if symbol not in self.alphabet:
            symbol = OTHER
        return self.transitions[(state, symbol)]

    def run(self, word: Sequence[str]) -> tuple[Hashable, bool]:
        """Final state and whether an activating symbol was read."""
        state = self.initial
        activated = False
        for symbol in word:
            if symbol not in self.alphabet:
                symbol = OTHER
            activated = activated or symbol in self.activating
            state = self.transitions[(state, symbol)]
        return state, activated

    def accepts(self, word: Sequence[str]) -> bool:
        return self.run(word)[0] in self.accepting

    def live_states(self) -> frozenset:
        """States from which an accepting state is still reachable."""
        live = set(self.accepting)
        changed = True
        while changed:
            changed = False
            for (state, _), target in self.transitions.items():
                if state not in live and target in live:
                    live.add(state)
                    changed = True
        return frozenset(live)


def _parts(constraint) -> tuple[Template, tuple[str, ...]]:
    if isinstance(constraint, tuple):
        template, params = constraint
        return Template(template), tuple(params)
    return constraint.template, tuple(constraint.symbols)


def to_automaton(constraint, alphabet: Iterable[str]) -> ConstraintAutomaton:
    template, params = _parts(constraint)
    symbols = tuple(sorted(set(alphabet) | {OTHER}))
    missing = set(params) - set(symbols)
    if missing:
        raise ValueError(f"alphabet lacks constraint parameters {sorted(missing)}")
    table, initial, accepting = _table(template)
    role_of = {}
    for symbol in symbols:
        if symbol == params[0]:
            role_of[symbol] = "a"
        elif len(params) > 1 and symbol == params[1]:
            role_of[symbol] = "b"
        else:
            role_of[symbol] = "o"
    transitions = {}
    for state, row in table.items():
        for symbol in symbols:
            transitions[(state, symbol)] = row.get(role_of[symbol], state)
    if template in AT_START:
        activating = frozenset(symbols)
    else:
        activating = activation_symbols(template, params)
    return ConstraintAutomaton(
        alphabet=symbols,
        states=tuple(sorted(table, key=repr)),
        initial=initial,
        transitions=transitions,
        accepting=accepting,
        activating=activating,
    )


class StateBudgetExceeded(RuntimeError):
    """The product automaton of a group grew past the configured budget."""


def connected_groups(group: Sequence) -> list[list]:
    """Split constraints into classes that share (transitively) at least one symbol."""
    members = list(group)
    parent = list(range(len(members)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, c in enumerate(members):
        for symbol in _parts(c)[1]:
            if symbol in owner:
                parent[find(i)] = find(owner[symbol])
            else:
                owner[symbol] = i
    classes: dict[int, list] = {}
    for i, c in enumerate(members):
        classes.setdefault(find(i), []).append(c)
    return list(classes.values())


def _unactivatable(component: Sequence, budget: int) -> list:
    alphabet = sorted({s for c in component for s in _parts(c)[1]} | {OTHER})
    automata = [to_automaton(c, alphabet) for c in component]
    live = [a.live_states() for a in automata]
    initial = tuple(a.initial for a in automata)
    if any(s not in lv for s, lv in zip(initial, live)):
        return list(component)
    # a symbol only moves the automata that mention it; all others self-loop
    affected = {
        symbol: [k for k, c in enumerate(component) if symbol in _parts(c)[1]] for symbol in alphabet
    }

    index = {initial: 0}
    states = [initial]
    edges: list[list[tuple[str, int]]] = [[]]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        current = states[i]
        for symbol in alphabet:
            movers = affected[symbol]
            if not movers:
                edges[i].append((symbol, i))
                continue
            nxt = list(current)
            dead = False
            for k in movers:
                target = automata[k].transitions[(current[k], symbol)]
                if target not in live[k]:
                    dead = True
                    break
                nxt[k] = target
            if dead:
                continue
            nxt = tuple(nxt)
            j = index.get(nxt)
            if j is None:
                j = len(states)
                if j >= budget:
                    raise StateBudgetExceeded(f"product automaton exceeds {budget} states")
                index[nxt] = j
                states.append(nxt)
                edges.append([])
                queue.append(j)
            edges[i].append((symbol, j))

    reverse: list[list[int]] = [[] for _ in states]
    for i, out in enumerate(edges):
        for _, j in out:
            reverse[j].append(i)
    good = [all(s in a.accepting for a, s in zip(automata, st)) for st in states]
    coreach = set(i for i, g in enumerate(good) if g)
    stack = list(coreach)
    while stack:
        j = stack.pop()
        for i in reverse[j]:
            if i not in coreach:
                coreach.add(i)
                stack.append(i)

    # activation depends on the symbol only, so collect symbols on useful edges
    useful: set[str] = set()
    for i, out in enumerate(edges):
        for symbol, j in out:
            if j in coreach:
                useful.add(symbol)
    return [c for c, a in zip(component, automata) if not (a.activating & useful)]


def unactivatable(group: Iterable, budget: int = DEFAULT_STATE_BUDGET) -> list:
    """Members of ``group`` that no word satisfying the whole group can activate."""
    result = []
    for component in connected_groups(list(group)):
        result.extend(_unactivatable(component, budget))
    return result


def is_consistent(group: Iterable, budget: int = DEFAULT_STATE_BUDGET) -> bool:
    group = list(group)
    return all(not _unactivatable(comp, budget) for comp in connected_groups(group))


@dataclass(frozen=True)
class CorrectionSet:
    constraints: frozenset

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(sorted(self.constraints, key=_sort_key))


def _sort_key(c) -> str:
    return getattr(c, "key", None) or repr(c)


def minimal_unsatisfiable_subset(group: Iterable, budget: int = DEFAULT_STATE_BUDGET) -> list:
    """A subset-minimal inconsistent subset of ``group``.

    Uses divide-and-conquer shrinking (QuickXplain), which needs far fewer
    consistency checks than deleting one constraint at a time.
    """
    members = sorted(dict.fromkeys(group), key=_sort_key)
    if is_consistent(members, budget):
        raise ValueError("group is consistent; it has no unsatisfiable subset")
    # an inconsistent connected component suffices; components are independent
    for component in connected_groups(members):
        if _unactivatable(component, budget):
            members = sorted(component, key=_sort_key)
            break

    def shrink(background: list, added: bool, candidates: list) -> list:
        if added and not is_consistent(background, budget):
            return []
        if len(candidates) == 1:
            return candidates
        half = len(candidates) // 2
        first, second = candidates[:half], candidates[half:]
        from_second = shrink(background + first, True, second)
        from_first = shrink(background + from_second, bool(from_second), first)
        return from_first + from_second

    return sorted(shrink([], False, members), key=_sort_key)


def small_cores(group: Iterable, budget: int = DEFAULT_STATE_BUDGET) -> list[frozenset]:
    """All inconsistent singletons and pairs of ``group`` (pairs only if both members pass alone)."""
    members = sorted(dict.fromkeys(group), key=_sort_key)
    cores = [frozenset({c}) for c in members if not is_consistent([c], budget)]
    alone = [c for c in members if frozenset({c}) not in cores]
    for x, y in itertools.combinations(alone, 2):
        if set(_parts(x)[1]) & set(_parts(y)[1]) and not is_consistent([x, y], budget):
            cores.append(frozenset({x, y}))
    return cores


def _hitting_sets(cores: list[frozenset], size_cap: int) -> list[frozenset]:
    """Subset-minimal hitting sets of ``cores`` with at most ``size_cap`` members."""
    found: set[frozenset] = set()

    def extend(chosen: frozenset) -> None:
        missed = [c for c in cores if not c & chosen]
        if not missed:
            found.add(chosen)
            return
        if len(chosen) == size_cap:
            return
        target = min(missed, key=lambda c: (len(c), sorted(map(_sort_key, c))))
        for member in sorted(target, key=_sort_key):
            extend(chosen | {member})

    extend(frozenset())
    return sorted(
        (h for h in found if not any(o < h for o in found)),
        key=lambda h: (len(h), sorted(map(_sort_key, h))),
    )


def minimal_correction_sets(
    group: Iterable,
    size_cap: int = DEFAULT_MCS_CAP,
    protected: Iterable = (),
    budget: int = DEFAULT_STATE_BUDGET,
) -> list[CorrectionSet]:
    """All subset-minimal removal sets of size at most ``size_cap`` restoring consistency.

    Members of ``protected`` are never part of a correction set.  Returns an
    empty list (and logs a diagnostic) if nothing within the cap works.

    Correction sets are the minimal hitting sets of the unsatisfiable cores,
    so cores are collected lazily: a candidate hitting set of the cores found
    so far either restores consistency or exposes a new core.
    """
    if size_cap < 1:
        raise ValueError("size_cap must be at least 1")
    members = sorted(dict.fromkeys(group), key=_sort_key)
    if is_consistent(members, budget):
        raise ValueError("group is already consistent; there is nothing to correct")
    protected = set(protected)
    # small cores are cheap to find and usually dominate; larger ones are found lazily
    cores = small_cores(members, budget) or [frozenset(minimal_unsatisfiable_subset(members, budget))]
    verified: set[frozenset] = set()
    while True:
        removable = [c - protected for c in cores]
        if any(not r for r in removable):
            found: list[frozenset] = []
            break
        found = _hitting_sets(removable, size_cap)
        new_core = None
        for h in found:
            if h in verified:
                continue
            rest = [c for c in members if c not in h]
            if is_consistent(rest, budget):
                verified.add(h)
            else:
                new_core = frozenset(minimal_unsatisfiable_subset(rest, budget))
                break
        if new_core is None:
            break
        cores.append(new_core)
    if not found:
        log.info("no correction set of size <= %d restores consistency", size_cap)
    return [CorrectionSet(h) for h in found]
