import json

import pytest
from hypothesis import given, strategies as st

from bpcheck.declare import holds_on_all
from bpcheck.miner import (
    ConstraintCollection,
    mine_activity_constraints,
    mine_collection,
    mine_interobject_constraints,
    mine_intraobject_constraints,
    mine_model,
    mine_role_constraints,
    object_sequence,
    playout,
    project_per_object,
    refine_collection,
)
from bpcheck.model import Kind, MinedConstraint as M, ProcessModel, Template as T
from bpcheck.petri import sequence_net
from bpcheck.synthetic import synthetic_collection

from conftest import FIXTURES
from oracle_mining import mine_sequences

PI = ("create order", "check order", "approve order", "ship goods")
ORDER_F = {PI, ("create order", "check order", "reject order")}


def model(seqs, role_map=None, mid="m"):
    seqs = {tuple(s) for s in seqs}
    role_map = role_map or {}
    return ProcessModel(mid, frozenset(a for s in seqs for a in s), frozenset(seqs),
                        frozenset(role_map.values()), role_map)


def test_playout_identity_and_net():
    m = model([["a", "b"]])
    assert playout(m) == {("a", "b")}
    assert playout(sequence_net(["a", "b"])) == {("a", "b")}


def test_activity_mining_examples():
    found = mine_activity_constraints(model([["create order", "check order"]]))
    assert M(Kind.ACTIVITY, T.ALTERNATE_SUCCESSION, ("create order", "check order")) in found
    # Precedence and Response hold as well; they are pruned only during refinement
    for t in (T.PRECEDENCE, T.RESPONSE):
        assert M(Kind.ACTIVITY, t, ("create order", "check order")) in found
    assert M(Kind.ACTIVITY, T.RESPONSE, ("check order", "create order")) not in found


def test_object_projection():
    assert object_sequence(PI) == ("order", "order", "order", "goods")
    found = mine_interobject_constraints(model([PI]))
    assert M(Kind.INTEROBJ, T.PRECEDENCE, ("order", "goods")) in found


def test_responded_existence_between_objects():
    m = model([["enter invoice", "enter goods receipt"], ["enter goods receipt"], ["ship goods"]])
    assert M(Kind.INTEROBJ, T.RESPONDED_EXISTENCE, ("invoice", "goods receipt")) in mine_interobject_constraints(m)


def test_per_object_projection():
    proj = project_per_object([PI], ["order", "goods", "invoice"])
    assert proj == {"order": {("create", "check", "approve")}, "goods": {("ship",)}, "invoice": {()}}


def test_intraobject_examples():
    found = mine_intraobject_constraints(model(ORDER_F))
    for t, p in [(T.PRECEDENCE, ("check", "approve")), (T.NOT_CO_EXISTENCE, ("approve", "reject"))]:
        assert M(Kind.INTRAOBJ, t, ("order", *p)) in found
    assert M(Kind.INTRAOBJ, T.EXACTLY_ONE, ("order", "create", None)) in found
    assert M(Kind.INTRAOBJ, T.AT_LEAST_ONE, ("order", "approve", None)) not in found
    item = model([["create purchase order item", "ship goods"], ["create purchase order item"]])
    assert M(Kind.INTRAOBJ, T.EXACTLY_ONE, ("purchase order item", "create", None)) in mine_intraobject_constraints(item)


def test_refined_order_constraints_match_golden():
    golden = json.loads((FIXTURES / "golden" / "order_intraobj.json").read_text())
    expected = {(T(t), tuple(p)) for t, *p in golden["constraints"]}
    assert expected == mine_sequences([("create", "check", "approve"), ("create", "check", "reject")])
    got = {(c.template, c.symbols) for c in mine_collection([model(ORDER_F)]).of_kind(Kind.INTRAOBJ)
           if c.params[0] == "order"}
    assert got == expected


def test_role_mining():
    m = model([["enter invoice"]], {"enter invoice": "accounts payable"})
    assert mine_role_constraints(m) == {M(Kind.ROLE, T.ABSENCE, ("enter invoice", "accounts payable"))}
    assert mine_role_constraints(model([["a"]])) == set()


def test_refinement_merges_label_variants():
    a = {M(Kind.ACTIVITY, T.PRECEDENCE, ("create invoice", "approve invoice"))}
    b = {M(Kind.ACTIVITY, T.PRECEDENCE, ("invoice created", "invoice approved"))}
    coll = refine_collection([("m1", a), ("m2", b)])
    (c,) = coll
    assert c.params == ("create invoice", "approve invoice") and c.support == 2
    assert coll.provenance[c.key] == {"m1", "m2"}


def _support(n, *cs):
    return [(f"m{i}", set(cs)) for i in range(n)]


def test_pruning_requires_equal_support():
    resp = M(Kind.ACTIVITY, T.RESPONSE, ("a", "b"))
    rex = M(Kind.ACTIVITY, T.RESPONDED_EXISTENCE, ("a", "b"))
    coll = refine_collection(_support(3, resp, rex))
    assert [c.template for c in coll] == [T.RESPONSE]
    coll = refine_collection(_support(3, resp, rex) + [("m3", {rex}), ("m4", {rex})])
    assert {(c.template, c.support) for c in coll} == {(T.RESPONSE, 3), (T.RESPONDED_EXISTENCE, 5)}


def test_pruning_respects_object_scope():
    strong = M(Kind.INTRAOBJ, T.RESPONSE, ("order", "a", "b"))
    weak = M(Kind.INTRAOBJ, T.RESPONDED_EXISTENCE, ("invoice", "a", "b"))
    assert len(refine_collection(_support(1, strong, weak))) == 2


def test_collapsing_parameters_are_dropped():
    c = M(Kind.ACTIVITY, T.RESPONSE, ("create invoice", "invoice created"))
    assert len(refine_collection([("m", {c})])) == 0


@pytest.fixture(scope="module")
def synthetic():
    return synthetic_collection()


def test_mining_is_sound_on_synthetic_models(synthetic):
    from bpcheck.miner import action_sequence

    for m in synthetic[:6]:
        seqs = sorted(m.sequences)
        for c in mine_model(m):
            if c.kind is Kind.ROLE:
                assert m.role_map[c.params[0]] == c.params[1]
                continue
            if c.kind is Kind.ACTIVITY:
                projected = seqs
            elif c.kind is Kind.INTEROBJ:
                projected = [object_sequence(s) for s in seqs]
            else:
                projected = [p for p in (action_sequence(s, c.params[0]) for s in seqs) if p]
            assert holds_on_all(c.template, c.symbols, projected)["activated_somewhere"], c
            assert len(set(c.symbols)) == len(c.symbols)


def test_support_bounded_and_refinement_idempotent(synthetic):
    coll = mine_collection(synthetic[:8])
    assert all(1 <= c.support <= 8 for c in coll)
    assert refine_collection(coll) == coll
    assert mine_collection(synthetic[:8], jobs=2) == coll


constraint_sets = st.sets(
    st.builds(
        lambda t, pair: M(Kind.ACTIVITY, t, pair),
        st.sampled_from([T.RESPONSE, T.RESPONDED_EXISTENCE, T.SUCCESSION, T.CO_EXISTENCE, T.PRECEDENCE]),
        st.sampled_from([("a", "b"), ("b", "a"), ("a", "c")]),
    ),
    max_size=6,
)


@given(st.lists(constraint_sets, min_size=1, max_size=4))
def test_refinement_laws(per_model):
    coll = refine_collection([(f"m{i}", s) for i, s in enumerate(per_model)])
    assert refine_collection(coll) == coll
    assert all(c.support == len(coll.provenance[c.key]) <= len(per_model) for c in coll)
    assert isinstance(coll, ConstraintCollection)
