"""Rule-based object/action extraction, tense standardization and synonym lookup."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .model import normalize_label

CONJUNCTIONS = frozenset({"and", "or", "&", "/"})
_LEADING_FILLERS = frozenset({"a", "an", "the", "on", "of", "for", "to", "about", "with", "in", "up"})
_TOKEN = re.compile(r"[a-z0-9&/]+(?:'[a-z]+)?")
_SHORT_CVC = re.compile(r"^[^aeiou]*[aeiou][^aeiouwxy]$")
_DOUBLING = frozenset(
    {"submit", "commit", "transfer", "refer", "admit", "permit", "occur", "prefer",
     "control", "omit", "regret", "equip", "compel", "patrol"}
)


def _data_lines(name: str) -> list[str]:
    text = resources.files("bpcheck.data").joinpath(name).read_text(encoding="utf-8")
    return [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def _read_pairs(lines: Iterable[str]) -> dict[str, str]:
    table = {}
    for ln in lines:
        left, right = ln.split("\t")
        table[left.strip()] = right.strip()
    return table


@lru_cache(maxsize=None)
def verb_lexicon() -> frozenset[str]:
    return frozenset(ln.strip() for ln in _data_lines("verbs.txt"))


@lru_cache(maxsize=None)
def irregular_forms() -> dict[str, str]:
    return _read_pairs(_data_lines("irregular.tsv"))


@lru_cache(maxsize=None)
def irregular_participles() -> dict[str, str]:
    return _read_pairs(_data_lines("participles.tsv"))


@dataclass(frozen=True, order=True)
class ObjectActionPair:
    object: str
    action: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.object:
            raise ValueError("object must be non-empty")


def tokenize(label: str) -> list[str]:
    return _TOKEN.findall(normalize_label(label))


def standardize_action(action: str) -> str:
    """Present-tense lemma of a verb form; unknown words are returned unchanged."""
    word = normalize_label(action)
    verbs = verb_lexicon()
    if word in verbs:
        return word
    irregular = irregular_forms()
    if word in irregular:
        return irregular[word]
    for candidate in _suffix_candidates(word):
        if candidate in verbs:
            return candidate
    return word


def _suffix_candidates(word: str) -> list[str]:
    out: list[str] = []
    if word.endswith("ied") and len(word) > 4:
        out.append(word[:-3] + "y")
    for suffix in ("ed", "ing"):
        if word.endswith(suffix) and len(word) > len(suffix) + 1:
            stem = word[: -len(suffix)]
            out.extend([stem, stem + "e"])
            if len(stem) >= 2 and stem[-1] == stem[-2]:
                out.append(stem[:-1])
    if word.endswith("ies") and len(word) > 4:
        out.append(word[:-3] + "y")
    if word.endswith("es") and len(word) > 3:
        out.append(word[:-2])
    if word.endswith("s") and not word.endswith("ss") and len(word) > 2:
        out.append(word[:-1])
    return out


def is_base_verb(token: str) -> bool:
    return token in verb_lexicon()


def is_inflected_verb(token: str) -> bool:
    """Past tense, participle or gerund of a known verb (not a base form itself)."""
    if token in verb_lexicon() or token.endswith("s") and not token.endswith("ss"):
        return False
    lemma = standardize_action(token)
    return lemma != token and lemma in verb_lexicon()


def _object(tokens: list[str]) -> str:
    i = 0
    while i < len(tokens) - 1 and tokens[i] in _LEADING_FILLERS:
        i += 1
    return " ".join(tokens[i:])


def parse_label(label: str) -> set[ObjectActionPair]:
    """Extract (object, action) pairs from an activity label."""
    return set(ordered_pairs(label))


@lru_cache(maxsize=65536)
def ordered_pairs(label: str) -> tuple[ObjectActionPair, ...]:
    """Like :func:`parse_label`, keeping the order in which actions appear."""
    tokens = tokenize(label)
    if not tokens:
        return ()
    if len(tokens) == 1:
        if is_inflected_verb(tokens[0]):
            return ()
        return (ObjectActionPair(tokens[0]),)

    if is_inflected_verb(tokens[-1]):
        i = len(tokens) - 1
        verbs = [tokens[i]]
        while i - 2 >= 1 and tokens[i - 1] in CONJUNCTIONS and is_inflected_verb(tokens[i - 2]):
            verbs.append(tokens[i - 2])
            i -= 2
        obj = _object(tokens[:i])
        return tuple(ObjectActionPair(obj, standardize_action(v)) for v in reversed(verbs))

    if is_base_verb(tokens[0]):
        verbs = [tokens[0]]
        i = 1
        while i + 1 < len(tokens) and tokens[i] in CONJUNCTIONS and is_base_verb(tokens[i + 1]):
            verbs.append(tokens[i + 1])
            i += 2
        if i >= len(tokens):
            return ()
        obj = _object(tokens[i:])
        return tuple(ObjectActionPair(obj, standardize_action(v)) for v in verbs)

    return (ObjectActionPair(" ".join(tokens)),)


def objects_of(label: str) -> set[str]:
    return {p.object for p in parse_label(label)}


@lru_cache(maxsize=65536)
def activity_object(label: str) -> Optional[str]:
    """The business object an activity refers to; several objects merge into one."""
    objects = sorted({p.object for p in ordered_pairs(label)})
    if not objects:
        return None
    return " ".join(objects)


def actions_on(label: str, obj: str) -> tuple[str, ...]:
    return tuple(p.action for p in ordered_pairs(label) if p.object == obj and p.action)


def standardize_label(label: str) -> str:
    """Re-emit a label as ``action object`` in present tense, e.g. ``create invoice``."""
    tokens = tokenize(label)
    if len(tokens) == 1 and is_inflected_verb(tokens[0]):
        return standardize_action(tokens[0])
    pairs = ordered_pairs(label)
    actions = list(dict.fromkeys(p.action for p in pairs if p.action))
    if not pairs or not actions:
        return " ".join(tokens)
    # all pairs of one label share the (compound) object
    return f"{' and '.join(actions)} {pairs[0].object}"


def past_participle(verb: str) -> str:
    verb = standardize_action(verb)
    table = irregular_participles()
    if verb in table:
        return table[verb]
    if verb.endswith("e"):
        return verb + "d"
    if len(verb) > 2 and verb.endswith("y") and verb[-2] not in "aeiou":
        return verb[:-1] + "ied"
    if verb in _DOUBLING or _SHORT_CVC.match(verb):
        return verb + verb[-1] + "ed"
    return verb + "ed"


def indefinite_article(noun: str) -> str:
    return "an" if noun[:1].lower() in "aeiou" else "a"


class SynonymLexicon:
    """Symmetric, reflexive verb synonym relation loaded from ``lemma<TAB>syn1,syn2`` lines."""

    def __init__(self, relation: dict[str, set[str]] | None = None):
        self._rel: dict[str, set[str]] = {}
        for lemma, syns in (relation or {}).items():
            for s in syns:
                self.add(lemma, s)

    def add(self, left: str, right: str) -> None:
        left, right = standardize_action(left), standardize_action(right)
        self._rel.setdefault(left, {left}).add(right)
        self._rel.setdefault(right, {right}).add(left)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "SynonymLexicon":
        lex = cls()
        for n, ln in enumerate(lines, 1):
            if not ln.strip() or ln.startswith("#"):
                continue
            try:
                lemma, rest = ln.rstrip("\n").split("\t")
            except ValueError:
                raise ValueError(f"line {n}: expected 'lemma<TAB>syn1,syn2,...'") from None
            for s in rest.split(","):
                if s.strip():
                    lex.add(lemma.strip(), s.strip())
        return lex

    @classmethod
    def load(cls, path: str | Path) -> "SynonymLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)

    @classmethod
    def bundled(cls) -> "SynonymLexicon":
        return cls.from_lines(_data_lines("synonyms.tsv"))

    def synonyms(self, lemma: str) -> set[str]:
        lemma = standardize_action(lemma)
        return set(self._rel.get(lemma, {lemma}))

    def syn(self, n1: str, n2: str) -> bool:
        a, b = standardize_action(n1), standardize_action(n2)
        return a == b or b in self._rel.get(a, ())

    def items(self):
        return sorted((k, sorted(v)) for k, v in self._rel.items())


@lru_cache(maxsize=1)
def default_lexicon() -> SynonymLexicon:
    return SynonymLexicon.bundled()


def syn(n1: str, n2: str, lexicon: SynonymLexicon | None = None) -> bool:
    return (lexicon or default_lexicon()).syn(n1, n2)
