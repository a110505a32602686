import pytest
from hypothesis import given, strategies as st

from bpcheck.automata import is_consistent
from bpcheck.model import Event, EventLog, FittedConstraint, Kind, MinedConstraint as M, Template as T, Trace
from bpcheck.selector import (
    LogIndex,
    ReviewFilter,
    SelectionConfig,
    apply_review,
    ensure_consistency,
    fit_constraints,
    relevance,
    score,
    scope_groups,
    select,
    select_constraints,
)
from bpcheck.similarity import LexicalSimilarity, VectorFileSimilarity

from conftest import FIXTURES


def log_of(*seqs, roles=None):
    roles = roles or {}
    return EventLog(tuple(Trace(f"c{i}", tuple(Event(a, roles.get(a)) for a in s)) for i, s in enumerate(seqs)))


def fitted(kind, template, components, support=1, rel=0.0, sims=(1.0,)):
    arity = len(components)
    src = M(kind, template, components, support)
    pairs = tuple(((f"m{i}", f"l{i}"), s) for i, s in enumerate(sims))
    return FittedConstraint(src, components, pairs, relevance=rel, epsilon=0.0)


def act(template, a, b, rel=0.5, support=1):
    return fitted(Kind.ACTIVITY, template, (a, b), support=support, rel=rel)


def test_examine_purchase_order_fitting():
    c = M(Kind.INTRAOBJ, T.AT_LEAST_ONE, ("order", "check", None))
    out = fit_constraints([c], log_of(["examine purchase order", "ship goods"]), provider=LexicalSimilarity())
    assert [f.components for f in out] == [("purchase order", "examine", None)]
    assert all(score > 0.5 for _, score in out[0].sim)


def test_dual_examination_fitting():
    c = M(Kind.ACTIVITY, T.PRECEDENCE, ("examine request", "decide on request"))
    log = log_of(
        ["receive request", "perform basic examination", "decide on request"],
        ["receive request", "perform thorough examination", "decide on request"],
    )
    out = fit_constraints([c], log, provider=VectorFileSimilarity(FIXTURES / "fitting" / "vectors.tsv"))
    assert sorted(f.components for f in out) == [
        ("perform basic examination", "decide on request"),
        ("perform thorough examination", "decide on request"),
    ]


def test_unmatched_constraint_contributes_nothing():
    c = M(Kind.ACTIVITY, T.RESPONSE, ("pay salary", "hire employee"))
    assert fit_constraints([c], log_of(["ship goods", "create order"])) == []


def test_role_and_interobject_fitting():
    role = M(Kind.ROLE, T.ABSENCE, ("approve order", "manager"))
    inter = M(Kind.INTEROBJ, T.PRECEDENCE, ("order", "invoice"))
    log = log_of(["approve order", "send invoice"], roles={"approve order": "manager", "send invoice": "clerk"})
    out = {f.key for f in fit_constraints([role, inter], log)}
    assert out == {"role|Absence|approve order|manager", "interobj|Precedence|order|invoice"}


def test_fitting_respects_epsilon():
    c = M(Kind.ACTIVITY, T.RESPONSE, ("create order", "check order"))
    log = log_of(["create purchase order", "check order"])
    assert fit_constraints([c], log, SelectionConfig(epsilon=0.5))
    assert fit_constraints([c], log, SelectionConfig(epsilon=0.99)) == []
    assert fit_constraints([c], LogIndex.of(log), SelectionConfig(epsilon_overrides={"activities": 0.99})) == []


@given(st.floats(0, 0.95))
def test_fitted_similarities_exceed_epsilon(eps):
    cs = [M(Kind.ACTIVITY, T.RESPONSE, ("create order", "check order")),
          M(Kind.INTRAOBJ, T.RESPONSE, ("order", "create", "check"))]
    log = log_of(["create purchase order", "check order", "order checked"])
    for f in fit_constraints(cs, log, SelectionConfig(epsilon=eps)):
        assert all(s > eps for _, s in f.sim)


def test_relevance_examples():
    top = fitted(Kind.ACTIVITY, T.RESPONSE, ("a", "b"), support=10, sims=(1.0,))
    mid = fitted(Kind.ACTIVITY, T.RESPONSE, ("a", "c"), support=5, sims=(0.7, 0.9))
    assert relevance(top, [top, mid], 0.9) == pytest.approx(1.0)
    assert relevance(mid, [top, mid], 0.5) == pytest.approx(0.65)
    assert relevance(mid, [top, mid], 1.0) == pytest.approx(0.8)
    assert [c.relevance for c in score([top, mid], 0.5)] == pytest.approx([1.0, 0.65])


def test_top_k_and_ties():
    hi, lo = act(T.RESPONSE, "a", "b", 0.9), act(T.RESPONSE, "a", "c", 0.7)
    assert select([lo, hi], SelectionConfig.top_k(1)) == [hi]
    weak, strong = act(T.RESPONSE, "a", "b", 0.5, 2), act(T.RESPONSE, "x", "y", 0.5, 4)
    assert select([weak, strong], SelectionConfig.top_k(1)) == [strong]


def test_threshold_is_strict():
    c = act(T.RESPONSE, "a", "b", 0.5)
    assert select([c], SelectionConfig.threshold(0.5)) == []
    assert select([c], SelectionConfig.threshold(0.49)) == [c]


relevances = st.lists(st.floats(0, 1), min_size=1, max_size=12)


@given(relevances, st.floats(0, 1), st.floats(0, 1))
def test_threshold_monotone(rels, t1, t2):
    pool = [act(T.RESPONSE, "a", f"b{i}", r) for i, r in enumerate(rels)]
    lo, hi = sorted((t1, t2))
    assert set(select(pool, SelectionConfig.threshold(hi))) <= set(select(pool, SelectionConfig.threshold(lo)))


@given(relevances, st.integers(1, 12))
def test_top_k_keeps_the_best(rels, k):
    pool = [act(T.RESPONSE, "a", f"b{i}", r) for i, r in enumerate(rels)]
    chosen = select(pool, SelectionConfig.top_k(k))
    assert len(chosen) == min(k, len(pool))
    rest = [c for c in pool if c not in chosen]
    assert all(c.relevance <= min(x.relevance for x in chosen) for c in rest)


@given(st.lists(st.tuples(st.floats(0.01, 1), st.integers(1, 9)), min_size=1, max_size=8))
def test_omega_one_orders_by_similarity(entries):
    pool = [fitted(Kind.ACTIVITY, T.RESPONSE, ("a", f"b{i}"), support=s, sims=(sim,))
            for i, (sim, s) in enumerate(entries)]
    chosen = select(score(pool, 1.0), SelectionConfig.top_k(len(pool)))
    sims = [c.avg_sim for c in chosen]
    assert sims == sorted(sims, reverse=True)


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        SelectionConfig(k={Kind.ACTIVITY: 3}, tau={Kind.ACTIVITY: 0.5})
    with pytest.raises(ValueError):
        SelectionConfig(omega=2)
    with pytest.raises(ValueError):
        SelectionConfig(epsilon_overrides={"colours": 0.3})
    cfg = SelectionConfig(k={Kind.ACTIVITY: 3}, tau={Kind.ROLE: 0.4}, epsilon_overrides={"roles": 0.7})
    assert SelectionConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.strategy_for(Kind.ROLE) == ("tau", 0.4)
    assert cfg.strategy_for(Kind.INTEROBJ) == ("k", 100)


def test_review_filter():
    note = fitted(Kind.INTRAOBJ, T.RESPONSE, ("notification", "send", "process"))
    keep = fitted(Kind.INTRAOBJ, T.RESPONSE, ("order", "create", "check"))
    act_note = act(T.RESPONSE, "send notification", "create order")
    f = ReviewFilter(objects={"Notification"})
    assert apply_review([note, keep, act_note], f) == [keep]
    assert apply_review([note, keep], ReviewFilter()) == [note, keep]
    assert apply_review([note], ReviewFilter(objects={"notification"}, pin=set())) == []
    with pytest.raises(ValueError):
        ReviewFilter(objects={"notification"}, pin={note.key})
    assert ReviewFilter.from_dict(f.to_dict()) == f
    with pytest.raises(ValueError):
        ReviewFilter.from_dict({"exclude": {"colours": []}})


def test_role_filter():
    r = fitted(Kind.ROLE, T.ABSENCE, ("send notification", "clerk"))
    assert apply_review([r], ReviewFilter(roles={"clerk"})) == []
    assert apply_review([r], ReviewFilter(actions={"send"})) == []


TRIPLE = [
    act(T.RESPONSE, "a", "b", 0.9),
    act(T.RESPONSE, "b", "c", 0.8),
    act(T.NOT_CO_EXISTENCE, "a", "c", 0.3),
]


def test_repair_removes_lowest_relevance():
    kept, diags = ensure_consistency(TRIPLE)
    assert kept == TRIPLE[:2]
    assert diags[0]["status"] == "repaired" and diags[0]["removed"] == [TRIPLE[2].key]


def test_repair_honours_pins():
    kept, _ = ensure_consistency(TRIPLE, review=ReviewFilter(pin={TRIPLE[2].key}))
    assert kept == [TRIPLE[0], TRIPLE[2]]


def test_consistent_input_is_unchanged():
    ok = [act(T.RESPONSE, "a", "b"), act(T.PRECEDENCE, "a", "b")]
    assert ensure_consistency(ok) == (ok, [])


def test_unresolved_and_iterative_repair():
    # two clashes sharing x form one component that needs a removal of size 2
    clash = [act(T.CO_EXISTENCE, "x", y, 0.9) for y in ("y", "z")]
    clash += [act(T.NOT_CO_EXISTENCE, "x", y, 0.2 + i / 10) for i, y in enumerate(("y", "z"))]
    kept, diags = ensure_consistency(clash, SelectionConfig(mcs_size_cap=1))
    assert any(d["status"] == "unresolved" for d in diags)
    kept, diags = ensure_consistency(clash, SelectionConfig(mcs_size_cap=1, repair="iterative"))
    assert sorted(c.key for c in kept) == sorted(c.key for c in clash[:2])
    assert is_consistent(kept)


def test_scope_groups():
    cs = [act(T.RESPONSE, "a", "b"), fitted(Kind.INTRAOBJ, T.RESPONSE, ("order", "x", "y")),
          fitted(Kind.ROLE, T.ABSENCE, ("a", "r"))]
    assert sorted(scope_groups(cs)) == ["activity", "intraobj:order"]


def test_select_constraints_pipeline_sizes():
    mined = [M(Kind.ACTIVITY, T.RESPONSE, ("create order", "check order"), 3),
             M(Kind.ACTIVITY, T.NOT_CO_EXISTENCE, ("create order", "check order"), 1),
             M(Kind.INTRAOBJ, T.AT_LEAST_ONE, ("order", "create", None), 2)]
    log = log_of(["create order", "check order"])
    result = select_constraints(mined, log)
    assert len(result.selected) <= len(result.reviewed) <= len(result.recommended) <= len(result.fitted)
    assert "activity|NotCoExistence|create order|check order" not in {c.key for c in result.selected}
