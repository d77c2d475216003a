import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsmrv.propspec import (BoolOp, F, G, In, ListOp, Lit, Not, PropertySyntaxError, Quant, RangeList, Rel,
                            Var, free_vars, normalize, parse_property, pretty_print)

CORPUS = [
    'G[(p1 == "E" -> p2 != "E") && (p2 == "E" -> p3 != "E") && (p3 == "E" -> p4 != "E") && '
    '(p4 == "E" -> p5 != "E") && (p5 == "E" -> p1 != "E")]',
    "G[(r > 0 -> w == 0) && (r >= 0) && (w == 0 || w == 1)]",
    "G[(ww > 0 -> r' <= r)]",
    "G[all(i, up, F[f == i])] && G[all(i, down, F[f == i])]",
    'G[up==up\' && down==down\' -> (d == "down" && d\' == "down" -> f > f\') && '
    '(d == "up" && d\' == "up" -> f < f\') && (d != d\' -> f == f\')]',
    'G[up == up\' && down == down\' -> (d == "down" && f <= up#min && f <= down#min -> d\' == "up")]',
    'G[up == up\' && down == down\' -> (d == "up" && f >= up#max && f >= down#max -> d\' == "down")]',
    'P[s == "Service_Requested" ~~> s == "Authorization_Granted" ~~> s == "Protected_Resource_Sent"]',
    'G[a <= 325 -> dir == "C"]',
    "G[d >= 0 && d <= 300]",
    "G[d <= 299]",
    "F[x in 1:5] || !G[exists(j, {1, 2, -3}, j * 2 == y - 1)] && up#size >= 0",
]


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    ast = parse_property(text)
    out = pretty_print(ast)
    assert parse_property(out) == ast
    assert pretty_print(parse_property(out)) == out


def test_precedence_and_associativity():
    e = parse_property("a || b && c -> d -> e")
    assert e == BoolOp("->", BoolOp("||", Var("a"), BoolOp("&&", Var("b"), Var("c"))),
                       BoolOp("->", Var("d"), Var("e")))
    assert parse_property("!x == 1") == Not(Rel("==", Var("x"), Lit(1)))
    assert parse_property("1 - 2 - 3") == parse_property("(1 - 2) - 3")
    assert parse_property("x = 1") == parse_property("x == 1")


def test_structures():
    assert parse_property("up#max") == ListOp(Var("up"), "max")
    assert parse_property("x in 1:3") == In(Var("x"), RangeList(Lit(1), Lit(3)))
    q = parse_property("all(i, up, F[f == i])")
    assert isinstance(q, Quant) and isinstance(q.body, F)
    assert free_vars(q) == {"up", "f"}
    assert parse_property("x'") == Var("x", True)


@pytest.mark.parametrize("text, msg", [
    ("G[x == 1", "unbalanced '\\['"),
    ("(x == 1", "unbalanced '\\('"),
    ("x ~~> y", "only allowed inside P"),
    ("P[a ~~> b]", "three parts"),
    ("P[a' ~~> b ~~> c]", "primed"),
    ("1 < x < 3", "chained"),
    ("x#avg", "min, max or size"),
    ("x == ", "expected an expression"),
])
def test_syntax_errors(text, msg):
    with pytest.raises(PropertySyntaxError, match=msg):
        parse_property(text)


def test_error_reports_position():
    with pytest.raises(PropertySyntaxError) as ei:
        parse_property("G[x == ]")
    assert ei.value.pos == 7


def _texts(ps):
    return [pretty_print(p) for p in ps]


def test_normalize_splits():
    assert _texts(normalize(parse_property(CORPUS[1]))) == ["G[r > 0 -> w == 0]", "G[r >= 0]", "G[w == 0 || w == 1]"]
    assert _texts(normalize(parse_property("G[p -> q && r]"))) == ["G[p -> q]", "G[p -> r]"]
    assert len(normalize(parse_property(CORPUS[0]))) == 5
    assert _texts(normalize(parse_property("P[(a || b) ~~> c ~~> (d || e)]"))) == [
        "P[a ~~> c ~~> d]", "P[a ~~> c ~~> e]", "P[b ~~> c ~~> d]", "P[b ~~> c ~~> e]"]


def test_normalize_leaves_inequivalent_forms():
    for text in ("G[a || b]", "P[a ~~> (b || c) ~~> d]"):
        assert normalize(parse_property(text)) == [parse_property(text)]


names = st.sampled_from(["x", "y", "up"])
leaves = st.one_of(names.map(Var), st.integers(-5, 5).map(Lit))
bools = st.recursive(
    st.builds(Rel, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), leaves, leaves),
    lambda c: st.one_of(st.builds(BoolOp, st.sampled_from(["&&", "||", "->"]), c, c), st.builds(Not, c),
                        st.builds(G, c)),
    max_leaves=8)


@settings(max_examples=200)
@given(bools)
def test_printer_is_inverse_of_parser(ast):
    assert parse_property(pretty_print(ast)) == ast
