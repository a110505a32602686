"""Brute-force LTL-f interpretation of the Declare templates.

This module deliberately shares no code with :mod:`bpcheck.declare`; it is the
reference the scanning evaluator and the automata are tested against.
"""
from __future__ import annotations

import itertools
from typing import Sequence

from .model import Template

MAX_ALPHABET = 5
MAX_LENGTH = 8


def atom(s):
    return ("atom", s)


def Not(f):
    return ("not", f)


def And(*fs):
    return ("and",) + fs


def Implies(f, g):
    return ("implies", f, g)


def Iff(f, g):
    return ("iff", f, g)


def F(f):
    return ("F", f)


def G(f):
    return ("G", f)


def X(f):
    return ("X", f)


def Y(f):
    return ("Y", f)


def U(f, g):
    return ("U", f, g)


def S(f, g):
    return ("S", f, g)


def O(f):
    return ("O", f)


def holds(formula, word: Sequence, i: int) -> bool:
    """Truth of ``formula`` at position ``i`` of a non-empty finite word."""
    op = formula[0]
    n = len(word)
    if op == "atom":
        return word[i] == formula[1]
    if op == "not":
        return not holds(formula[1], word, i)
    if op == "and":
        return all(holds(f, word, i) for f in formula[1:])
    if op == "implies":
        return (not holds(formula[1], word, i)) or holds(formula[2], word, i)
    if op == "iff":
        return holds(formula[1], word, i) == holds(formula[2], word, i)
    if op == "F":
        return any(holds(formula[1], word, j) for j in range(i, n))
    if op == "G":
        return all(holds(formula[1], word, j) for j in range(i, n))
    if op == "X":
        return i + 1 < n and holds(formula[1], word, i + 1)
    if op == "Y":
        return i - 1 >= 0 and holds(formula[1], word, i - 1)
    if op == "O":
        return any(holds(formula[1], word, j) for j in range(0, i + 1))
    if op == "U":
        return any(
            holds(formula[2], word, j) and all(holds(formula[1], word, k) for k in range(i, j))
            for j in range(i, n)
        )
    if op == "S":
        return any(
            holds(formula[2], word, j) and all(holds(formula[1], word, k) for k in range(j + 1, i + 1))
            for j in range(0, i + 1)
        )
    raise ValueError(f"unknown operator {op!r}")


def formula_for(template: Template, params: Sequence):
    template = Template(template)
    a = atom(params[0])
    b = atom(params[1]) if len(params) > 1 else None
    T = Template
    if template is T.AT_LEAST_ONE:
        return F(a)
    if template is T.AT_MOST_ONE:
        return Not(F(And(a, X(F(a)))))
    if template is T.EXACTLY_ONE:
        return And(formula_for(T.AT_LEAST_ONE, params), formula_for(T.AT_MOST_ONE, params))
    if template is T.ABSENCE:
        return Not(F(a))
    if template is T.RESPONDED_EXISTENCE:
        return Implies(F(a), F(b))
    if template is T.RESPONSE:
        return G(Implies(a, F(b)))
    if template is T.ALTERNATE_RESPONSE:
        return G(Implies(a, X(U(Not(a), b))))
    if template is T.PRECEDENCE:
        return G(Implies(b, O(a)))
    if template is T.ALTERNATE_PRECEDENCE:
        # strict-past reading of "(not b) S a" at every b
        return G(Implies(b, Y(S(Not(b), a))))
    if template is T.CO_EXISTENCE:
        return Iff(F(a), F(b))
    if template is T.SUCCESSION:
        return And(formula_for(T.RESPONSE, params), formula_for(T.PRECEDENCE, params))
    if template is T.ALTERNATE_SUCCESSION:
        return And(
            formula_for(T.ALTERNATE_RESPONSE, params), formula_for(T.ALTERNATE_PRECEDENCE, params)
        )
    if template is T.NOT_CO_EXISTENCE:
        return And(Implies(F(a), Not(F(b))), Implies(F(b), Not(F(a))))
    raise ValueError(f"unknown template {template!r}")


def satisfies(template: Template, params: Sequence, word: Sequence) -> bool:
    if not word:
        raise ValueError("the oracle interprets non-empty words only")
    return holds(formula_for(template, params), list(word), 0)


def all_words(alphabet, max_len: int):
    symbols = sorted(alphabet)
    for length in range(1, max_len + 1):
        yield from itertools.product(symbols, repeat=length)


def oracle_satisfying(template: Template, params: Sequence, alphabet, max_len: int) -> set[tuple]:
    if len(set(alphabet)) > MAX_ALPHABET or max_len > MAX_LENGTH:
        raise ValueError(
            f"oracle bounded to |alphabet| <= {MAX_ALPHABET} and length <= {MAX_LENGTH}"
        )
    formula = formula_for(template, params)
    return {w for w in all_words(alphabet, max_len) if holds(formula, w, 0)}
