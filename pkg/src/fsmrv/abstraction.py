"""Abstraction functions, abstract model construction, and characteristic constraints."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .domains import (BOOLS, Constraint, IntervalSet, ValueSet, full_domain, point_domain)
from .model import PATH, GraphBuilder, StateGraph
from .propspec import BoolOp, Lit, Neg, Not, P, Rel, Var, parse_property, pretty_print
from .trace import UNDEF, KeyWrite, value_tag

NUMERIC = ("int", "real")
_FLIP = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!="}


class AbstractionError(ValueError):
    pass


# -- abstract values ----------------------------------------------------------


class _Unknown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unknown"

    def __reduce__(self):
        return (_Unknown, ())


UNKNOWN = _Unknown()


@dataclass(frozen=True)
class BoolAbs:
    value: bool


@dataclass(frozen=True)
class Bucket:
    index: int


@dataclass(frozen=True)
class Raw:
    value: object


@dataclass(frozen=True)
class PathClass:
    """Path-model node: concrete control values satisfying slot ``slot`` (1..3)."""

    slot: int
    label: str


# -- abstraction functions ----------------------------------------------------


@dataclass(frozen=True)
class Identity:
    attr: str
    tag: str


@dataclass(frozen=True)
class BoolPred:
    """Predicate over one attribute: comparisons with constants joined by && || !."""

    attr: str
    tag: str
    expr: object  # propspec AST

    def __post_init__(self):
        _check_pred(self.expr, self.attr, self.tag)

    def holds(self, v) -> bool:
        return _eval_pred(self.expr, v)

    def text(self) -> str:
        return pretty_print(self.expr)


@dataclass(frozen=True)
class Range:
    attr: str
    tag: str
    cutpoints: tuple

    def __post_init__(self):
        if self.tag not in NUMERIC:
            raise AbstractionError(f"range abstraction needs a numeric attribute, {self.attr} is {self.tag}")
        cps = self.cutpoints
        if not cps:
            raise AbstractionError("range abstraction needs at least one cutpoint")
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise AbstractionError(f"cutpoints must be strictly increasing: {list(cps)}")

    def bucket(self, v) -> int:
        i = 0
        for c in self.cutpoints:
            if v >= c:
                i += 1
            else:
                break
        return i

    def interval(self, i: int) -> IntervalSet:
        cps = self.cutpoints
        d = self.tag == "int"
        if not 0 <= i <= len(cps):
            raise AbstractionError(f"bucket {i} out of range for {len(cps)} cutpoints")
        if i == 0:
            return IntervalSet.atom("<", cps[0], d)
        if i == len(cps):
            return IntervalSet.atom(">=", cps[-1], d)
        return IntervalSet.atom(">=", cps[i - 1], d).intersect(IntervalSet.atom("<", cps[i], d))

    def bucket_text(self, i: int) -> str:
        cps = self.cutpoints
        if i == 0:
            return f"<{_num(cps[0])}"
        if i == len(cps):
            return f">={_num(cps[-1])}"
        return f"[{_num(cps[i - 1])}:{_num(cps[i])})"

    def text(self) -> str:
        return "range[" + ":".join(_num(c) for c in self.cutpoints) + "]"


def _num(x) -> str:
    return str(int(x)) if isinstance(x, float) and x.is_integer() else str(x)


def _const(n):
    if isinstance(n, Lit):
        return n.value
    if isinstance(n, Neg) and isinstance(n.operand, Lit):
        return -n.operand.value
    return None


def _atom_parts(n, attr: str):
    """``x op c`` or ``c op x`` -> (op, c) oriented with the variable on the left."""
    if isinstance(n, Rel):
        if isinstance(n.lhs, Var) and not n.lhs.primed and n.lhs.name == attr:
            c = _const(n.rhs)
            if c is not None:
                return n.op, c
        if isinstance(n.rhs, Var) and not n.rhs.primed and n.rhs.name == attr:
            c = _const(n.lhs)
            if c is not None:
                return _FLIP[n.op], c
    return None


def _check_pred(n, attr, tag):
    if isinstance(n, BoolOp) and n.op in ("&&", "||"):
        _check_pred(n.lhs, attr, tag)
        _check_pred(n.rhs, attr, tag)
        return
    if isinstance(n, Not):
        _check_pred(n.body, attr, tag)
        return
    parts = _atom_parts(n, attr)
    if parts is None:
        raise AbstractionError(f"boolean abstraction of {attr} must compare {attr} with constants: "
                               f"{pretty_print(n)}")
    op, c = parts
    legal = ("==", "!=", "<", ">") if tag in NUMERIC else ("==", "!=")
    if op not in legal:
        raise AbstractionError(f"operator {op} not supported for {tag} attribute {attr}")
    ctag = value_tag(c)
    if tag in NUMERIC and ctag not in NUMERIC:
        raise AbstractionError(f"constant {c!r} is not numeric")
    if tag not in NUMERIC and ctag != tag:
        raise AbstractionError(f"constant {c!r} does not match {tag} attribute {attr}")


def _cmp(op, a, b) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def _eval_pred(n, v) -> bool:
    if isinstance(n, BoolOp):
        if n.op == "&&":
            return _eval_pred(n.lhs, v) and _eval_pred(n.rhs, v)
        return _eval_pred(n.lhs, v) or _eval_pred(n.rhs, v)
    if isinstance(n, Not):
        return not _eval_pred(n.body, v)
    var = n.lhs if isinstance(n.lhs, Var) else n.rhs
    op, c = _atom_parts(n, var.name)
    return _cmp(op, v, c)


def _pred_set(n, attr, tag):
    if isinstance(n, BoolOp):
        a, b = _pred_set(n.lhs, attr, tag), _pred_set(n.rhs, attr, tag)
        return a.intersect(b) if n.op == "&&" else a.union(b)
    if isinstance(n, Not):
        return _pred_set(n.body, attr, tag).complement()
    op, c = _atom_parts(n, attr)
    return atom_set(op, c, tag)


def atom_set(op: str, c, tag: str):
    """Solution set of ``x op c`` for an attribute of type ``tag``."""
    if tag in NUMERIC:
        return IntervalSet.atom(op, c, discrete=tag == "int")
    universe = BOOLS if tag == "bool" else None
    if op == "==":
        return ValueSet({c}, universe=universe)
    if op == "!=":
        return ValueSet({c}, True, universe)
    raise AbstractionError(f"operator {op} not supported for {tag} values")


def bool_pred(attr: str, tag: str, text: str) -> BoolPred:
    return BoolPred(attr, tag, parse_property(text))


# -- operations ---------------------------------------------------------------


def _compatible(v, tag: str) -> bool:
    vt = value_tag(v)
    return vt == tag or (vt in NUMERIC and tag in NUMERIC)


def apply_abstraction(value, fn):
    """Map a concrete value (or UNDEF) to its abstract value under ``fn``."""
    if value is UNDEF:
        return UNKNOWN
    if isinstance(fn, Identity):
        if not _compatible(value, fn.tag):
            raise TypeError(f"{fn.attr}: {value_tag(value)} value under {fn.tag} identity")
        return Raw(value)
    if not _compatible(value, fn.tag):
        raise TypeError(f"{fn.attr}: cannot abstract {value_tag(value)} value {value!r}")
    if isinstance(fn, BoolPred):
        return BoolAbs(fn.holds(value))
    if isinstance(fn, Range):
        return Bucket(fn.bucket(value))
    raise TypeError(f"not an abstraction function: {fn!r}")


def characteristic(fn, av) -> Constraint:
    """The concrete values that ``av`` stands for under ``fn``."""
    tag = fn.tag
    if av is UNKNOWN:
        return Constraint(fn.attr, tag, full_domain(tag))
    if isinstance(fn, Identity) and isinstance(av, Raw):
        return Constraint(fn.attr, tag, point_domain(tag, av.value))
    if isinstance(fn, BoolPred) and isinstance(av, BoolAbs):
        s = _pred_set(fn.expr, fn.attr, tag)
        return Constraint(fn.attr, tag, s if av.value else s.complement())
    if isinstance(fn, Range) and isinstance(av, Bucket):
        return Constraint(fn.attr, tag, fn.interval(av.index))
    raise AbstractionError(f"{av!r} is not in the range of {describe(fn)}")


def describe(fn) -> str:
    if isinstance(fn, Identity):
        return f"identity({fn.attr})"
    if isinstance(fn, BoolPred):
        return f"bool({fn.text()})"
    return fn.text()


def label(fn, av) -> str:
    """Short display text for an abstract value, e.g. ``E`` / ``∼E`` / ``[1:3)``."""
    if av is UNKNOWN or av is UNDEF:
        return "?"
    if isinstance(av, Raw):
        return value_text(av.value)
    if isinstance(av, PathClass):
        return av.label
    if isinstance(av, BoolAbs):
        parts = _atom_parts(fn.expr, fn.attr) if fn is not None else None
        if parts is not None and parts[0] == "==":
            t = value_text(parts[1])
        else:
            t = fn.text() if fn is not None else "T"
            if not av.value:
                t = f"({t})"
        return t if av.value else "∼" + t
    if isinstance(av, Bucket):
        if fn is None:
            return f"#{av.index}"
        return fn.bucket_text(av.index)
    return value_text(av)


def value_text(v) -> str:
    if v is UNDEF:
        return "?"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return "{" + ",".join(str(x) for x in v) + "}"
    if isinstance(v, float):
        return _num(v) if v.is_integer() else repr(v)
    return str(v)


def build_asm(writes: Iterable[KeyWrite], keys, fns: dict) -> StateGraph:
    """Abstract state model: vectors of abstract values, with transition counts."""
    b = GraphBuilder(keys, fns)
    for w in writes:
        b.add(w)
    return b.model


# -- path abstraction ---------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """Control attribute plus three disjoint sets of control values."""

    attr: str
    f1: tuple
    f2: tuple
    f3: tuple
    name: str = ""

    def __post_init__(self):
        s1, s2, s3 = set(self.f1), set(self.f2), set(self.f3)
        overlap = (s1 & s2) | (s1 & s3) | (s2 & s3)
        if overlap:
            raise AbstractionError(f"path slots are not disjoint: {sorted(map(str, overlap))}")

    @property
    def slots(self) -> tuple:
        return (self.f1, self.f2, self.f3)

    def slot_of(self, v) -> Optional[int]:
        for i, consts in enumerate(self.slots, 1):
            if v in consts:
                return i
        return None

    def label(self, slot: int) -> str:
        return " || ".join(value_text(c) for c in self.slots[slot - 1])

    def to_property(self):
        def disj(consts):
            atoms = [Rel("==", Var(self.attr), Lit(c)) for c in consts]
            out = atoms[0]
            for a in atoms[1:]:
                out = BoolOp("||", out, a)
            return out

        return P(disj(self.f1), disj(self.f2), disj(self.f3))

    @classmethod
    def from_property(cls, p, name: str = "") -> "PathSpec":
        """PathSpec for a P property whose slots are ``attr == const`` disjunctions."""
        if not isinstance(p, P):
            raise AbstractionError("path abstraction needs a P[...] property")
        attr = None
        slots = []
        for slot in (p.f1, p.f2, p.f3):
            consts = []
            for d in _disjuncts(slot):
                if not (isinstance(d, Rel) and d.op == "=="):
                    raise AbstractionError(f"path slot must be equalities joined by ||: {pretty_print(slot)}")
                var, c = (d.lhs, _const(d.rhs)) if isinstance(d.lhs, Var) else (d.rhs, _const(d.lhs))
                if not isinstance(var, Var) or c is None:
                    raise AbstractionError(f"path slot must compare the control attribute with constants: "
                                           f"{pretty_print(d)}")
                if attr is None:
                    attr = var.name
                elif var.name != attr:
                    raise AbstractionError("all path slots must test the same attribute")
                consts.append(c)
            slots.append(tuple(consts))
        return cls(attr, *slots, name=name)


def _disjuncts(n):
    if isinstance(n, BoolOp) and n.op == "||":
        return _disjuncts(n.lhs) + _disjuncts(n.rhs)
    return [n]


class PathBuilder:
    """Incremental path-model construction over writes of the control attribute."""

    def __init__(self, spec: PathSpec):
        self.spec = spec
        self.model = StateGraph(PATH, (spec.attr,), (UNKNOWN,))
        self.model.path_spec = spec

    def add(self, w: KeyWrite) -> Optional[tuple]:
        if w.name != self.spec.attr:
            return None
        hits = [i for i, consts in enumerate(self.spec.slots, 1) if w.value in consts]
        if not hits:
            return None
        if len(hits) > 1:
            raise AbstractionError(f"seq {w.seq}: value {w.value!r} satisfies slots {hits}")
        slot = hits[0]
        return self.model.step((PathClass(slot, self.spec.label(slot)),), w.seq)


def build_path_model(writes: Iterable[KeyWrite], spec: PathSpec) -> StateGraph:
    b = PathBuilder(spec)
    for w in writes:
        b.add(w)
    return b.model


def slot_node(m: StateGraph, slot: int) -> Optional[int]:
    for i, vec in enumerate(m.vectors):
        if isinstance(vec[0], PathClass) and vec[0].slot == slot:
            return i
    return None


def parse_abstraction(attr: str, tag: str, text: str):
    """``bool(<pred>)``, ``range[c1:...:cn]`` or ``identity``."""
    t = text.strip()
    if t in ("identity", "id"):
        return Identity(attr, tag)
    if t.startswith("bool(") and t.endswith(")"):
        return BoolPred(attr, tag, parse_property(t[5:-1]))
    if t.startswith("range[") and t.endswith("]"):
        body = t[6:-1]
        try:
            cps = tuple(_number(x) for x in body.split(":"))
        except ValueError:
            raise AbstractionError(f"bad range cutpoints {body!r}") from None
        return Range(attr, tag, cps)
    raise AbstractionError(f"unknown abstraction {text!r}")


def _number(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        return float(s)
