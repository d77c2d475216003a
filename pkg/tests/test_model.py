from hypothesis import given
from hypothesis import strategies as st

from fsmrv.export import graph_equal
from fsmrv.model import DSM, LSM, GraphBuilder, build_dsm, build_lsm, collapse, is_defined
from fsmrv.trace import UNDEF, KeyWrite


def W(*items):
    return [KeyWrite(i + 1, n, v) for i, (n, v) in enumerate(items)]


def test_lsm_one_state_per_write():
    m = build_lsm(W(("x", 1), ("y", 2), ("x", 1), ("z", 9)), ("x", "y"))
    assert m.kind == LSM and m.num_states() == 4
    assert m.vector(0) == (UNDEF, UNDEF)
    assert m.vector(3) == (1, 2)
    assert m.seq_of(1) == 1 and m.seq_of(0) is None
    assert [e[:2] for e in m.edges] == [(0, 1), (1, 2), (2, 3)]


def test_dsm_merges_and_counts():
    ws = W(("x", 1), ("x", 2), ("x", 1), ("x", 2), ("x", 2))
    m = build_dsm(ws, ("x",))
    assert m.kind == DSM and m.num_states() == 3
    assert m.counts == {(0, 1): 1, (1, 2): 2, (2, 1): 1, (2, 2): 1}
    assert m.edge_first_seq[(2, 1)] == 3
    assert m.first_seq == [None, 1, 2]
    assert m.total_transitions() == len(ws)


def test_builder_ignores_other_attrs():
    b = GraphBuilder(("x",))
    assert b.add(KeyWrite(1, "y", 3)) is None
    assert b.add(KeyWrite(2, "x", 3)) == (0, 1, True, True)


def test_is_defined():
    assert not is_defined((1, UNDEF)) and is_defined((1, 2))


writes = st.lists(st.tuples(st.sampled_from("abc"), st.integers(0, 3)), max_size=40)


@given(writes)
def test_lsm_long_trace_vectors_match_replay(items):
    ws = W(*items * 60)  # cross several checkpoints
    m = build_lsm(ws, ("a", "b", "c"))
    assert list(m.states()) == [m.vector(i) for i in range(m.num_states())]


@given(writes)
def test_dsm_equals_collapsed_lsm(items):
    ws = W(*items)
    assert graph_equal(build_dsm(ws, ("a", "b", "c")), collapse(build_lsm(ws, ("a", "b", "c"))))
    m = build_dsm(ws, ("a", "b", "c"))
    assert m.num_states() == len(set(build_lsm(ws, ("a", "b", "c")).states()))
