import pytest

from bpcheck.petri import PlayoutError, WorkflowNet, playout, sequence_net


def net(transitions, arcs, start="i", end="o", places=None):
    places = places or sorted({p for a in arcs for p in a if p not in transitions})
    return WorkflowNet(tuple(places), transitions, tuple(arcs), {start: 1}, {end: 1})


def test_sequence():
    assert playout(sequence_net(["a", "b", "c"])) == {("a", "b", "c")}


def test_choice_and_silent_steps():
    n = net(
        {"t1": "a", "t2": "b", "tau": None},
        [("i", "t1"), ("t1", "o"), ("i", "t2"), ("t2", "o"), ("i", "tau"), ("tau", "o")],
    )
    assert playout(n) == {("a",), ("b",), ()}


def test_parallel_interleavings():
    n = net(
        {"s": None, "a": "a", "b": "b", "j": None},
        [("i", "s"), ("s", "p1"), ("s", "p2"), ("p1", "a"), ("a", "q1"), ("p2", "b"), ("b", "q2"),
         ("q1", "j"), ("q2", "j"), ("j", "o")],
    )
    assert playout(n) == {("a", "b"), ("b", "a")}


def test_loop_bound():
    n = net(
        {"a": "a", "redo": None, "exit": None},
        [("i", "a"), ("a", "m"), ("m", "redo"), ("redo", "i"), ("m", "exit"), ("exit", "o")],
    )
    assert playout(n, loop_bound=1) == {("a",), ("a", "a")}
    assert playout(n, loop_bound=2) == {("a",), ("a", "a"), ("a", "a", "a")}


def test_unbounded_net_fails():
    n = net({"gen": "a", "end": "b"}, [("i", "gen"), ("gen", "i"), ("gen", "q"), ("i", "end"), ("end", "o")])
    with pytest.raises(PlayoutError):
        playout(n, loop_bound=100)


def test_dead_net_and_variant_cap():
    with pytest.raises(PlayoutError):
        playout(net({"a": "a"}, [("i", "a"), ("a", "x")], places=["i", "x", "o"]))
    wide = net({f"t{i}": f"a{i}" for i in range(5)}, [a for i in range(5) for a in (("i", f"t{i}"), (f"t{i}", "o"))])
    with pytest.raises(PlayoutError):
        playout(wide, variant_cap=3)


def test_bad_arcs_rejected():
    with pytest.raises(ValueError):
        WorkflowNet(("i", "o"), {"t": "a"}, (("i", "o"),), {"i": 1}, {"o": 1})
    with pytest.raises(ValueError):
        WorkflowNet(("i",), {"t": "a"}, (("i", "t"),), {"i": 1}, {"z": 1})
