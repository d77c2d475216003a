import pytest

from fsmrv.abstraction import (UNKNOWN, AbstractionError, BoolAbs, Bucket, Identity, PathBuilder, PathClass,
                               PathSpec, Range, Raw, apply_abstraction, bool_pred, build_asm, characteristic,
                               label, parse_abstraction)
from fsmrv.model import ASM
from fsmrv.propspec import parse_property
from fsmrv.trace import UNDEF, KeyWrite


def test_bool_pred_apply_and_characteristic():
    fn = bool_pred("k", "int", "k > 0 || k == 0")
    assert apply_abstraction(3, fn) == BoolAbs(True)
    assert apply_abstraction(-1, fn) == BoolAbs(False)
    assert apply_abstraction(UNDEF, fn) is UNKNOWN
    t = characteristic(fn, BoolAbs(True)).domain
    f = characteristic(fn, BoolAbs(False)).domain
    assert t.contains(0) and not t.contains(-1) and f.contains(-1) and not f.contains(0)
    assert characteristic(fn, UNKNOWN).domain.contains(-99)


def test_bool_pred_on_strings_and_bools():
    fn = bool_pred("p", "str", 'p == "E"')
    assert apply_abstraction("E", fn) == BoolAbs(True)
    dom = characteristic(fn, BoolAbs(False)).domain
    assert dom.contains("T") and not dom.contains("E")
    b = bool_pred("flag", "bool", "flag == true")
    assert characteristic(b, BoolAbs(False)).domain.contains(False)
    assert not characteristic(b, BoolAbs(False)).domain.contains(True)


def test_bool_pred_rejects_bad_predicates():
    with pytest.raises(AbstractionError):
        bool_pred("p", "str", 'p < "E"')
    with pytest.raises(AbstractionError):
        bool_pred("p", "int", "q > 1")


def test_range_buckets():
    fn = Range("a", "real", (324, 362, 365))
    assert [fn.bucket(v) for v in (0, 323.9, 324, 361.99, 362, 364, 365, 1000)] == [0, 0, 1, 1, 2, 2, 3, 3]
    assert [fn.bucket_text(i) for i in range(4)] == ["<324", "[324:362)", "[362:365)", ">=365"]
    dom = characteristic(fn, Bucket(1)).domain
    assert dom.contains(324) and dom.contains(361.5) and not dom.contains(362)
    with pytest.raises(AbstractionError):
        Range("a", "real", (3, 2))
    with pytest.raises(AbstractionError):
        Range("s", "str", (1,))


def test_int_range_is_integer_closed():
    fn = Range("w", "int", (0, 1, 2))
    assert characteristic(fn, Bucket(1)).domain.contains(0)
    assert not characteristic(fn, Bucket(1)).domain.contains(1)


def test_parse_abstraction_forms():
    assert parse_abstraction("x", "int", "identity") == Identity("x", "int")
    assert parse_abstraction("x", "int", "range[0:1:2]").cutpoints == (0, 1, 2)
    assert apply_abstraction(5, parse_abstraction("x", "int", "bool(x > 0 && x != 3)")) == BoolAbs(True)
    with pytest.raises(AbstractionError):
        parse_abstraction("x", "int", "fuzzy(x)")


def test_labels():
    e = bool_pred("p1", "str", 'p1 == "E"')
    assert label(e, BoolAbs(True)) == "E" and label(e, BoolAbs(False)) == "∼E"
    g = bool_pred("r", "int", "r > 0")
    assert label(g, BoolAbs(True)) == "r > 0" and label(g, BoolAbs(False)) == "∼(r > 0)"
    assert label(None, UNKNOWN) == "?"
    assert label(Identity("x", "int"), Raw(3)) == "3"


def test_type_mismatch_raises():
    with pytest.raises(TypeError):
        apply_abstraction("x", Range("a", "int", (1,)))


def test_build_asm_merges_by_abstract_vector():
    fns = {"r": bool_pred("r", "int", "r > 0")}
    ws = [KeyWrite(i + 1, "r", v) for i, v in enumerate([0, 1, 2, 3, 0, 5])]
    m = build_asm(ws, ("r",), fns)
    assert m.kind == ASM and m.num_states() == 3
    assert m.counts[(2, 2)] == 2


SPEC = parse_property('P[s == "A" || s == "A2" ~~> s == "B" ~~> s == "C"]')


def test_path_spec_from_property_and_back():
    spec = PathSpec.from_property(SPEC, "auth")
    assert spec.attr == "s" and spec.f1 == ("A", "A2") and spec.f3 == ("C",)
    assert PathSpec.from_property(spec.to_property()) == PathSpec("s", ("A", "A2"), ("B",), ("C",))
    with pytest.raises(AbstractionError):
        PathSpec.from_property(parse_property('P[s == "A" ~~> t == "B" ~~> s == "C"]'))
    with pytest.raises(AbstractionError):
        PathSpec.from_property(parse_property('P[s > 1 ~~> s == 2 ~~> s == 3]'))
    with pytest.raises(AbstractionError, match="disjoint"):
        PathSpec("s", ("A",), ("A",), ("C",))


def test_path_builder_keeps_only_slot_values():
    b = PathBuilder(PathSpec.from_property(SPEC))
    for i, v in enumerate(["x", "A", "y", "A2", "B", "C", "A", "C"], 1):
        b.add(KeyWrite(i, "s", v))
    m = b.model
    assert [v[0] for v in m.vectors[1:]] == [PathClass(1, "A || A2"), PathClass(2, "B"), PathClass(3, "C")]
    assert (1, 3) in m.counts and m.edge_first_seq[(1, 3)] == 8
    assert m.counts[(1, 1)] == 1
