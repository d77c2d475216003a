"""Canonical text for property ASTs.  ``parse_property(pretty_print(p)) == p``."""

from __future__ import annotations

from .ast import (Arith, BoolOp, F, G, In, ListLit, ListOp, Lit, Neg, Not, P, Quant,
                  RangeList, Rel, Var)

_IMPL, _OR, _AND, _NOT, _REL, _ADD, _MUL, _UNARY, _ATOM = range(1, 10)
_BOOL_PREC = {"->": _IMPL, "||": _OR, "&&": _AND}


def _lit(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        r = repr(v)
        return r if any(c in r for c in ".eE") else r + ".0"
    return str(v)


def _prec(n) -> int:
    if isinstance(n, BoolOp):
        return _BOOL_PREC[n.op]
    if isinstance(n, Not):
        return _NOT
    if isinstance(n, (Rel, In)):
        return _REL
    if isinstance(n, Arith):
        return _ADD if n.op in "+-" else _MUL
    if isinstance(n, Neg):
        return _UNARY
    if isinstance(n, Lit) and isinstance(n.value, (int, float)) and not isinstance(n.value, bool) and n.value < 0:
        return _UNARY
    return _ATOM


def _wrap(n, min_prec: int) -> str:
    s = pretty_print(n)
    return f"({s})" if _prec(n) < min_prec else s


def pretty_print(n) -> str:
    if isinstance(n, Lit):
        return _lit(n.value)
    if isinstance(n, Var):
        return n.name + ("'" if n.primed else "")
    if isinstance(n, ListOp):
        return f"{pretty_print(n.var)}#{n.op}"
    if isinstance(n, ListLit):
        return "{" + ", ".join(_wrap(i, _ADD) for i in n.items) + "}"
    if isinstance(n, RangeList):
        return f"{_wrap(n.lo, _ADD)}:{_wrap(n.hi, _ADD)}"
    if isinstance(n, Neg):
        # a bare "-5" would reparse as a negative literal
        inner = n.operand
        if isinstance(inner, Lit) or _prec(inner) < _ATOM:
            return f"-({pretty_print(inner)})"
        return "-" + pretty_print(inner)
    if isinstance(n, Arith):
        p = _prec(n)
        return f"{_wrap(n.lhs, p)} {n.op} {_wrap(n.rhs, p + 1)}"
    if isinstance(n, Rel):
        return f"{_wrap(n.lhs, _ADD)} {n.op} {_wrap(n.rhs, _ADD)}"
    if isinstance(n, In):
        lst = n.lst
        rhs = pretty_print(lst) if isinstance(lst, RangeList) else _wrap(lst, _ADD)
        return f"{_wrap(n.elem, _ADD)} in {rhs}"
    if isinstance(n, Not):
        b = n.body
        if isinstance(b, (Not, Var, Lit, G, F, P, Quant)):
            return "!" + pretty_print(b)
        return f"!({pretty_print(b)})"
    if isinstance(n, BoolOp):
        p = _BOOL_PREC[n.op]
        if n.op == "->":
            return f"{_wrap(n.lhs, p + 1)} -> {_wrap(n.rhs, p)}"
        return f"{_wrap(n.lhs, p)} {n.op} {_wrap(n.rhs, p + 1)}"
    if isinstance(n, G):
        return f"G[{pretty_print(n.body)}]"
    if isinstance(n, F):
        return f"F[{pretty_print(n.body)}]"
    if isinstance(n, P):
        return f"P[{pretty_print(n.f1)} ~~> {pretty_print(n.f2)} ~~> {pretty_print(n.f3)}]"
    if isinstance(n, Quant):
        lst = pretty_print(n.lst)
        return f"{n.kind}({n.var}, {lst}, {pretty_print(n.body)})"
    raise TypeError(f"not a property node: {n!r}")
