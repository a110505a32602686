import pytest
from hypothesis import given, strategies as st

from bpcheck.labels import (
    ObjectActionPair as P,
    SynonymLexicon,
    indefinite_article,
    irregular_forms,
    parse_label,
    past_participle,
    standardize_action,
    standardize_label,
    syn,
    verb_lexicon,
)


@pytest.mark.parametrize(
    "label, pairs",
    [
        ("approve purchase order", {P("purchase order", "approve")}),
        ("invoice created", {P("invoice", "create")}),
        ("ship goods", {P("goods", "ship")}),
        ("goods receipt", {P("goods receipt")}),
        ("receive and check document", {P("document", "receive"), P("document", "check")}),
        ("ApprovePurchaseOrder", {P("purchase order", "approve")}),
        ("", set()),
    ],
)
def test_parse_label(label, pairs):
    assert parse_label(label) == pairs


@pytest.mark.parametrize(
    "action, lemma",
    [("approved", "approve"), ("create", "create"), ("sent", "send"), ("checking", "check"), ("paid", "pay")],
)
def test_standardize_action(action, lemma):
    assert standardize_action(action) == lemma


def test_irregular_table_backs_sent():
    assert irregular_forms()["sent"] == "send"
    assert "send" in verb_lexicon()


@pytest.mark.parametrize(
    "label, canonical",
    [("invoice created", "create invoice"), ("create invoice", "create invoice"), ("PO approval", "po approval")],
)
def test_standardize_label(label, canonical):
    assert standardize_label(label) == canonical


def test_syn():
    assert syn("check", "examine")
    assert syn("examine", "check")
    assert syn("check", "check")
    assert not syn("check", "pay")
    assert syn("frobnicate", "frobnicate")


def test_lexicon_is_symmetric_and_reflexive():
    lex = SynonymLexicon.from_lines(["check\texamine,inspect", "", "# comment"])
    assert lex.syn("inspect", "check") and lex.syn("examine", "check")
    assert lex.syn("review", "review")
    # closure is symmetric, not transitive
    assert not lex.syn("examine", "inspect")
    with pytest.raises(ValueError):
        SynonymLexicon.from_lines(["no tab here"])


def test_participles_and_articles():
    assert [past_participle(v) for v in ("create", "check", "approve", "send", "pay", "ship", "confirm")] == [
        "created", "checked", "approved", "sent", "paid", "shipped", "confirmed"
    ]
    assert indefinite_article("invoice") == "an" and indefinite_article("order") == "an"
    assert indefinite_article("claim") == "a"


lemmas = st.sampled_from(sorted(verb_lexicon()))
forms = st.one_of(lemmas, lemmas.map(past_participle), st.sampled_from(sorted(irregular_forms())))


@given(forms)
def test_standardize_action_is_idempotent(word):
    once = standardize_action(word)
    assert standardize_action(once) == once


@given(lemmas, st.sampled_from(["order", "purchase order", "invoice", "goods receipt"]))
def test_canonical_labels_reparse_stably(verb, obj):
    for label in (f"{verb} {obj}", f"{obj} {past_participle(verb)}"):
        canonical = standardize_label(label)
        assert standardize_label(canonical) == canonical
        assert parse_label(canonical) == {P(p.object, p.action) for p in parse_label(label)}
