"""Property evaluation on concrete and abstract models.

Boolean results use Kleene three-valued logic with ``True``/``False``/``None``
internally; the public :class:`TruthValue` wraps them.  Undefined attribute
values (and primed variables with no successor) make atoms ``None`` (U).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .abstraction import (UNKNOWN, BoolPred, Identity, PathClass, PathSpec, Range, atom_set,
                          characteristic, label, value_text)
from .domains import Constraint, IntervalSet, ValueSet
from .model import ASM, DSM, LSM, PATH, LinearModel, StateGraph
from .propspec import (Arith, BoolOp, F, G, In, ListLit, ListOp, Lit, Neg, Not, P, Quant,
                       RangeList, Rel, Var, free_vars, has_primes, has_temporal, pretty_print)
from .trace import UNDEF, value_tag


class CheckError(ValueError):
    """The property cannot be checked on this kind of model."""


class EvalError(RuntimeError):
    """Runtime failure while evaluating a property on a trace."""

    def __init__(self, message: str, seq=None):
        self.seq = seq
        super().__init__(f"seq {seq}: {message}" if seq is not None else message)


class DisjointnessError(EvalError):
    pass


class TruthValue(enum.Enum):
    T = "T"
    F = "F"
    U = "U"

    @classmethod
    def of(cls, b) -> "TruthValue":
        return cls.U if b is None else (cls.T if b else cls.F)


TRUE, FALSE, INCOMPATIBLE, PENDING = "true", "false", "incompatible", "pending"


@dataclass
class Witness:
    state: int
    seq: Optional[int]
    vector: dict
    sub: str = ""
    edge: Optional[tuple] = None


@dataclass
class Verdict:
    value: str
    witness: Optional[Witness] = None
    detail: str = ""
    name: str = ""

    def __post_init__(self):
        if self.value == FALSE and self.witness is None:
            raise ValueError("a False verdict needs a witness")

    def to_record(self) -> dict:
        rec = {"property": self.name, "verdict": self.value}
        if self.witness is not None:
            if self.witness.seq is not None:
                rec["witnessSeq"] = self.witness.seq
            rec["witnessState"] = self.witness.vector
            if self.witness.edge is not None:
                rec["witnessEdge"] = list(self.witness.edge)
        rec["detail"] = self.detail
        return rec


# -- Kleene connectives -------------------------------------------------------


def k_not(a):
    return None if a is None else not a


def k_and(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def k_or(a, b):
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


# -- concrete evaluation ------------------------------------------------------


class Env:
    """Variable lookup for one state: current vector, optional successor, iterator bindings."""

    __slots__ = ("index", "cur", "nxt", "binds", "pos", "ctx")

    def __init__(self, index: dict, cur: tuple, nxt: Optional[tuple] = None, binds=None, pos=None, ctx=None):
        self.index = index
        self.cur = cur
        self.nxt = nxt
        self.binds = binds or {}
        self.pos = pos
        self.ctx = ctx

    def lookup(self, v: Var):
        if not v.primed and v.name in self.binds:
            return self.binds[v.name]
        k = self.index.get(v.name)
        if k is None:
            raise CheckError(f"unknown attribute {v.name!r}")
        if v.primed:
            return UNDEF if self.nxt is None else self.nxt[k]
        return self.cur[k]

    def bind(self, name, value) -> "Env":
        b = dict(self.binds)
        b[name] = value
        return Env(self.index, self.cur, self.nxt, b, self.pos, self.ctx)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _scalar(n, env: Env):
    if isinstance(n, Lit):
        return n.value
    if isinstance(n, Var):
        return env.lookup(n)
    if isinstance(n, Neg):
        x = _scalar(n.operand, env)
        if x is UNDEF:
            return UNDEF
        if not _is_num(x):
            raise EvalError(f"unary minus on {value_tag(x)} value")
        return -x
    if isinstance(n, Arith):
        a, b = _scalar(n.lhs, env), _scalar(n.rhs, env)
        if a is UNDEF or b is UNDEF:
            return UNDEF
        if not (_is_num(a) and _is_num(b)):
            raise EvalError(f"arithmetic {n.op} on {value_tag(a)} and {value_tag(b)}")
        if n.op == "+":
            return a + b
        if n.op == "-":
            return a - b
        if n.op == "*":
            return a * b
        if b == 0:
            raise EvalError("division by zero")
        if isinstance(a, int) and isinstance(b, int):
            q = abs(a) // abs(b)
            return q if (a >= 0) == (b >= 0) else -q
        return a / b
    if isinstance(n, ListOp):
        lst = env.lookup(n.var)
        if lst is UNDEF:
            return UNDEF
        if not isinstance(lst, tuple):
            raise EvalError(f"{n.var.name}#{n.op} on a {value_tag(lst)} value")
        if n.op == "size":
            return len(lst)
        if n.op == "min":
            return min(lst) if lst else math.inf
        return max(lst) if lst else -math.inf
    if isinstance(n, ListLit):
        items = tuple(_scalar(i, env) for i in n.items)
        return UNDEF if any(i is UNDEF for i in items) else items
    if isinstance(n, RangeList):
        lo, hi = _scalar(n.lo, env), _scalar(n.hi, env)
        if lo is UNDEF or hi is UNDEF:
            return UNDEF
        if not (isinstance(lo, int) and isinstance(hi, int)) or isinstance(lo, bool) or isinstance(hi, bool):
            raise EvalError("range bounds must be integers")
        return tuple(range(lo, hi))
    # boolean-valued expression used as a scalar
    b = _truth(n, env)
    return UNDEF if b is None else b


def compare(op: str, a, b) -> bool:
    if _is_num(a) and _is_num(b):
        pass
    elif value_tag(a) != value_tag(b):
        raise EvalError(f"cannot compare {value_tag(a)} with {value_tag(b)}")
    elif op not in ("==", "!="):
        raise EvalError(f"operator {op} is not defined on {value_tag(a)} values")
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _truth(n, env: Env):
    if isinstance(n, BoolOp):
        a = _truth(n.lhs, env)
        if n.op == "&&":
            return False if a is False else k_and(a, _truth(n.rhs, env))
        if n.op == "||":
            return True if a is True else k_or(a, _truth(n.rhs, env))
        return True if a is False else k_or(k_not(a), _truth(n.rhs, env))
    if isinstance(n, Not):
        return k_not(_truth(n.body, env))
    if isinstance(n, Rel):
        a, b = _scalar(n.lhs, env), _scalar(n.rhs, env)
        if a is UNDEF or b is UNDEF:
            return None
        return compare(n.op, a, b)
    if isinstance(n, In):
        x = _scalar(n.elem, env)
        lst = _scalar(n.lst, env)
        if x is UNDEF or lst is UNDEF:
            return None
        if not isinstance(lst, tuple):
            raise EvalError(f"'in' needs a list, got {value_tag(lst)}")
        return x in lst
    if isinstance(n, Quant):
        lst = _scalar(n.lst, env)
        if lst is UNDEF:
            return None
        if not isinstance(lst, tuple):
            raise EvalError(f"{n.kind}() needs a list, got {value_tag(lst)}")
        acc = n.kind == "all"
        for item in lst:
            r = _truth(n.body, env.bind(n.var, item))
            if n.kind == "all":
                acc = k_and(acc, r)
                if acc is False:
                    return False
            else:
                acc = k_or(acc, r)
                if acc is True:
                    return True
        return acc
    if isinstance(n, (G, F, P)):
        if env.ctx is None:
            raise CheckError(f"nested temporal operator needs the linear model: {pretty_print(n)}")
        return env.ctx.temporal(n, env)
    if isinstance(n, Lit):
        if isinstance(n.value, bool):
            return n.value
        raise EvalError(f"{value_text(n.value)} is not a boolean")
    if isinstance(n, Var):
        x = env.lookup(n)
        if x is UNDEF:
            return None
        if not isinstance(x, bool):
            raise EvalError(f"{n.name} is {value_tag(x)}, not bool")
        return x
    raise EvalError(f"not a boolean expression: {pretty_print(n)}")


def eval_expr(e, state: dict, successors=()):
    """Evaluate a temporal-free expression in ``state`` (name -> value).

    Boolean expressions give a :class:`TruthValue`, others a scalar or list
    (``UNDEF`` when an operand is undefined).  Primed variables range over
    ``successors``: T only if T for every successor, F only if F for every
    successor, U otherwise (including a conflict or no successor).
    """
    if has_temporal(e):
        raise CheckError("eval_expr takes a temporal-free expression")
    names = list(state)
    index = {a: i for i, a in enumerate(names)}
    cur = tuple(state[a] for a in names)
    succ = [tuple(s.get(a, UNDEF) for a in names) for s in successors] if has_primes(e) else [None]
    if not succ:
        succ = [None]
    results = []
    for nxt in succ:
        env = Env(index, cur, nxt)
        if _is_boolean(e):
            results.append(_truth(e, env))
        else:
            results.append(_scalar(e, env))
    if not _is_boolean(e):
        return results[0] if len(set(map(repr, results))) == 1 else UNDEF
    if all(r is True for r in results):
        return TruthValue.T
    if all(r is False for r in results):
        return TruthValue.F
    return TruthValue.U


def _is_boolean(n) -> bool:
    return isinstance(n, (BoolOp, Not, Rel, In, Quant, G, F, P)) or (isinstance(n, Lit) and isinstance(n.value, bool))


# -- linear model ------------------------------------------------------------


class _LinearContext:
    """Materialized LSM states plus cached suffix tables for nested G / F."""

    def __init__(self, m: LinearModel):
        self.m = m
        self.states = list(m.states())
        self.index = {a: i for i, a in enumerate(m.attrs)}
        self.cache = {}

    def env(self, i: int, binds=None) -> Env:
        nxt = self.states[i + 1] if i + 1 < len(self.states) else None
        return Env(self.index, self.states[i], nxt, binds, i, self)

    def temporal(self, n, env: Env):
        if isinstance(n, P):
            raise CheckError("P[...] must appear at top level")
        fv = free_vars(n.body)
        key = (n, tuple(sorted((k, v) for k, v in env.binds.items() if k in fv)))
        table = self.cache.get(key)
        if table is None:
            table = self._suffix(n, dict(key[1]))
            self.cache[key] = table
        return table[env.pos]

    def _suffix(self, n, binds) -> list:
        size = len(self.states)
        out = [None] * size
        seen_t = seen_f = seen_u = False
        for i in range(size - 1, -1, -1):
            r = _truth(n.body, self.env(i, binds))
            seen_t |= r is True
            seen_f |= r is False
            seen_u |= r is None
            if isinstance(n, F):
                out[i] = True if seen_t else (None if seen_u else False)
            else:
                out[i] = False if seen_f else (None if seen_u else True)
        return out


def _vec_text(attrs, vec, fns=None) -> dict:
    out = {}
    for a, v in zip(attrs, vec):
        fn = fns.get(a) if fns else None
        if isinstance(v, (PathClass,)) or v is UNKNOWN or fns:
            out[a] = label(fn, v)
        else:
            out[a] = value_text(v)
    return out


def _undefined_refs(body, index: dict, vec: tuple) -> bool:
    unprimed = {x.name for x in body.walk() if isinstance(x, Var) and not x.primed}
    bound = free_vars(body)
    return any(a in bound and a in index and (vec[index[a]] is UNDEF or vec[index[a]] is UNKNOWN)
               for a in unprimed)


def _lsm_g(m: LinearModel, n: G, strict: bool, ctx: Optional[_LinearContext]) -> Verdict:
    body = n.body
    index = {a: i for i, a in enumerate(m.attrs)}
    seqs = m.first_seq
    if ctx is not None:
        envs = (ctx.env(i) for i in range(len(ctx.states)))
    elif has_primes(body):
        envs = _pairwise_envs(index, m.states())
    else:
        envs = (Env(index, vec) for vec in m.states())
    decided = 0
    for i, env in enumerate(envs):
        r = _truth(body, env)
        if r is None:
            if not (strict and i > 0 and _undefined_refs(body, index, env.cur)):
                continue
            why = f"undefined attribute at state {i} (strict)"
        elif r:
            decided += 1
            continue
        else:
            why = f"violated at state {i}"
        return Verdict(FALSE, Witness(i, seqs[i], _vec_text(m.attrs, env.cur), pretty_print(body)), why)
    return Verdict(TRUE, detail="vacuous" if decided == 0 else f"{decided} states checked")


def _pairwise_envs(index, states):
    prev = None
    for vec in states:
        if prev is not None:
            yield Env(index, prev, vec)
        prev = vec
    if prev is not None:
        yield Env(index, prev, None)


def _lsm_f(m: LinearModel, n: F, ctx: Optional[_LinearContext]) -> Verdict:
    index = {a: i for i, a in enumerate(m.attrs)}
    states = ctx.states if ctx is not None else list(m.states())
    last = len(states) - 1
    for i, vec in enumerate(states):
        env = ctx.env(i) if ctx is not None else Env(index, vec, states[i + 1] if i < last else None)
        if _truth(n.body, env) is True:
            return Verdict(TRUE, detail=f"satisfied at seq {m.first_seq[i]}")
    return Verdict(FALSE, Witness(last, m.first_seq[last], _vec_text(m.attrs, states[last]), pretty_print(n.body)),
                   "never satisfied before the end of the trace")


def slot_of_state(n: P, env: Env) -> Optional[int]:
    hits = [k for k, f in enumerate((n.f1, n.f2, n.f3), 1) if _truth(f, env) is True]
    if len(hits) > 1:
        raise DisjointnessError(f"state satisfies slots {hits} of {pretty_print(n)}")
    return hits[0] if hits else None


def _lsm_p(m: LinearModel, n: P) -> Verdict:
    index = {a: i for i, a in enumerate(m.attrs)}
    prev = None
    retained = 0
    for i, vec in enumerate(m.states()):
        try:
            s = slot_of_state(n, Env(index, vec))
        except DisjointnessError as exc:
            raise DisjointnessError(str(exc), m.first_seq[i]) from None
        if s is None:
            continue
        retained += 1
        if prev is not None and prev[0] == 1 and s == 3:
            return Verdict(FALSE, Witness(i, m.first_seq[i], _vec_text(m.attrs, vec), pretty_print(n),
                                          edge=(prev[1], i)),
                           f"f1 state at seq {m.first_seq[prev[1]]} followed directly by f3 state")
        prev = (s, i)
    return Verdict(TRUE, detail="vacuous" if retained == 0 else f"{retained} retained states")


def _combine(op: str, a: Verdict, b: Optional[Verdict]) -> Verdict:
    if op == "!":
        if a.value == TRUE:
            return Verdict(FALSE, Witness(0, None, {}, "negated property"), "negation of a true property")
        if a.value == FALSE:
            return Verdict(TRUE, detail="negation of a false property")
        return a
    va = {TRUE: True, FALSE: False}.get(a.value)
    vb = {TRUE: True, FALSE: False}.get(b.value)
    if op == "->":
        op, va, a = "||", k_not(va), _combine("!", a, None)
    r = k_and(va, vb) if op == "&&" else k_or(va, vb)
    if r is True:
        return Verdict(TRUE, detail="; ".join(d for d in (a.detail, b.detail) if d))
    if r is False:
        w = a if va is False else b
        return Verdict(FALSE, w.witness, w.detail)
    return a if a.value not in (TRUE, FALSE) else b


def _top(n, leaf) -> Verdict:
    if isinstance(n, (G, F, P)):
        return leaf(n)
    if isinstance(n, Not):
        return _combine("!", _top(n.body, leaf), None)
    if isinstance(n, BoolOp):
        return _combine(n.op, _top(n.lhs, leaf), _top(n.rhs, leaf))
    raise CheckError(f"top-level property must be G[...], F[...], P[...] or a combination: {pretty_print(n)}")


def check_lsm(m: LinearModel, p, strict: bool = False) -> Verdict:
    """Check a property on the linear model (full G / F / P semantics)."""
    if m.kind != LSM:
        raise CheckError(f"check_lsm needs a linear model, got {m.kind}")
    nested = any(isinstance(x, (G, F, P)) for n in _leaves(p) for x in list(n.walk())[1:])
    ctx = _LinearContext(m) if nested else None

    def leaf(n):
        if isinstance(n, G):
            return _lsm_g(m, n, strict, ctx)
        if isinstance(n, F):
            return _lsm_f(m, n, ctx)
        for slot in (n.f1, n.f2, n.f3):
            if has_temporal(slot):
                raise CheckError("P[...] slots cannot contain temporal operators")
        return _lsm_p(m, n)

    return _top(p, leaf)


def _leaves(p) -> list:
    if isinstance(p, (G, F, P)):
        return [p]
    return [x for c in p.children() for x in _leaves(c)]


# -- distinct model ----------------------------------------------------------


def check_dsm(m: StateGraph, p, strict: bool = False) -> Verdict:
    """G properties on the distinct model; primed variables range over all successors."""
    if m.kind != DSM:
        raise CheckError(f"check_dsm needs a distinct model, got {m.kind}")
    if not isinstance(p, G):
        raise CheckError("the distinct model supports only G[...] properties; F and P require LSM")
    body = p.body
    if has_temporal(body):
        raise CheckError("nested temporal operators require LSM")
    index = {a: i for i, a in enumerate(m.attrs)}
    primed = has_primes(body)
    succ = m.successor_map() if primed else None
    decided = 0
    for i, vec in enumerate(m.vectors):
        nexts = [m.vectors[j] for j in succ[i]] if primed and succ[i] else [None]
        rs = [_truth(body, Env(index, vec, nxt)) for nxt in nexts]
        if False in rs:
            bad = rs.index(False)
            seq = m.first_seq[i]
            edge = None
            if primed and succ[i]:
                edge = (i, succ[i][bad])
                seq = m.edge_first_seq[edge]
            return Verdict(FALSE, Witness(i, seq, _vec_text(m.attrs, vec), pretty_print(body), edge),
                           f"violated at state {i}")
        if all(r is None for r in rs):
            if strict and i != m.start and _undefined_refs(body, index, vec):
                return Verdict(FALSE, Witness(i, m.first_seq[i], _vec_text(m.attrs, vec), pretty_print(body)),
                               f"undefined attribute at state {i} (strict)")
        else:
            decided += 1
    return Verdict(TRUE, detail="vacuous" if decided == 0 else f"{decided} states checked")


# -- validity on constraints ------------------------------------------------------


def _const_value(n):
    if any(isinstance(x, Var) for x in n.walk()):
        return None
    if isinstance(n, (ListLit, RangeList, ListOp)):
        return None
    try:
        v = _scalar(n, Env({}, ()))
    except (EvalError, CheckError):
        return None
    return None if v is UNDEF or isinstance(v, tuple) else v


@dataclass
class _Compiled:
    tree: object  # ("atom", k) | ("const", b) | ("not", t) | (op, l, r)
    atoms: list  # (var, op, const)
    text: list = field(default_factory=list)


_FLIP = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!="}


def compile_abstract(q) -> _Compiled:
    """Compile a body into atoms ``var op const``; rejects what cannot be checked abstractly."""
    atoms, text = [], []

    def atom(var, op, c, n):
        atoms.append((var, op, c))
        text.append(pretty_print(n))
        return ("atom", len(atoms) - 1)

    def go(n):
        if isinstance(n, BoolOp):
            return (n.op, go(n.lhs), go(n.rhs))
        if isinstance(n, Not):
            return ("not", go(n.body))
        if isinstance(n, Lit) and isinstance(n.value, bool):
            return ("const", n.value)
        if isinstance(n, Var) and not n.primed:
            return atom(n.name, "==", True, n)
        if isinstance(n, Rel):
            for var, other, op in ((n.lhs, n.rhs, n.op), (n.rhs, n.lhs, _FLIP[n.op])):
                if isinstance(var, Var):
                    if var.primed:
                        break
                    c = _const_value(other)
                    if c is not None:
                        return atom(var.name, op, c, n)
        raise CheckError(f"not abstractly checkable: {pretty_print(n)}")

    if has_primes(q) or has_temporal(q):
        raise CheckError(f"not abstractly checkable (primes or temporal operators): {pretty_print(q)}")
    return _Compiled(go(q), atoms, text)


def _run(tree, vals):
    kind = tree[0]
    if kind == "atom":
        return vals[tree[1]]
    if kind == "const":
        return tree[1]
    if kind == "not":
        return k_not(_run(tree[1], vals))
    a = _run(tree[1], vals)
    b = _run(tree[2], vals)
    if kind == "&&":
        return k_and(a, b)
    if kind == "||":
        return k_or(a, b)
    return k_or(k_not(a), b)


def _atom_solution(var, op, c, con: Constraint):
    tag = con.tag
    if tag in ("int", "real"):
        if not _is_num(c):
            raise CheckError(f"{var} is {tag} but compared with {value_text(c)}")
    elif value_tag(c) != tag:
        raise CheckError(f"{var} is {tag} but compared with {value_text(c)}")
    elif op not in ("==", "!="):
        raise CheckError(f"operator {op} is not defined on {tag} values")
    try:
        return atom_set(op, c, tag)
    except ValueError as exc:
        raise CheckError(str(exc)) from None


def _representatives(con: Constraint, consts: list) -> list:
    dom = con.domain
    if isinstance(dom, IntervalSet):
        crit = sorted({float(c) for c in consts} | set(dom.endpoints()))
        if dom.discrete:
            cands = {0}
            for p in crit:
                base = math.floor(p)
                cands.update((base - 1, base, base + 1, base + 2))
        else:
            cands = {0.0}
            cands.update(crit)
            cands.update((a + b) / 2 for a, b in zip(crit, crit[1:]))
            if crit:
                cands.update((crit[0] - 1, crit[-1] + 1))
        return sorted(x for x in cands if dom.contains(x))
    assert isinstance(dom, ValueSet)
    cands = set(consts)
    if not dom.negated:
        cands |= set(dom.values)
    if con.tag == "bool":
        cands |= {True, False}
    else:
        fresh = "~"
        while fresh in cands or fresh in dom.values:
            fresh += "~"
        cands.add(fresh)
    return [x for x in cands if dom.contains(x)]


def classify(constraints: dict, comp: _Compiled) -> set:
    """Set of Kleene results over all concretizations of ``constraints``."""
    per_atom = []
    for var, op, c in comp.atoms:
        con = constraints.get(var)
        if con is None:
            raise CheckError(f"no constraint for attribute {var!r}")
        if con.undefined:
            per_atom.append(None)
            continue
        sol = _atom_solution(var, op, c, con)
        if con.domain.issubset(sol):
            per_atom.append(True)
        elif con.domain.isdisjoint(sol):
            per_atom.append(False)
        else:
            per_atom.append(None)
    fast = _run(comp.tree, per_atom)
    if fast is not None:
        return {fast}
    # refine: enumerate one concrete value per region of each attribute's line
    by_var = {}
    for k, (var, _op, _c) in enumerate(comp.atoms):
        by_var.setdefault(var, []).append(k)
    choices = []
    for var, ks in by_var.items():
        con = constraints[var]
        if con.undefined or all(per_atom[k] is not None for k in ks):
            choices.append([(ks, tuple(per_atom[k] for k in ks))])
            continue
        pats = set()
        for v in _representatives(con, [comp.atoms[k][2] for k in ks]):
            pats.add(tuple(compare(comp.atoms[k][1], v, comp.atoms[k][2]) for k in ks))
        choices.append([(ks, p) for p in sorted(pats)])
    results = set()
    vals = [None] * len(comp.atoms)
    for combo in itertools.product(*choices):
        for ks, pat in combo:
            for k, b in zip(ks, pat):
                vals[k] = b
        results.add(_run(comp.tree, vals))
        if len(results) == 3:
            break
    return results


def decide_validity(constraints: dict, q) -> TruthValue:
    """T if every concretization satisfies ``q``, F if every one violates it, else U."""
    comp = q if isinstance(q, _Compiled) else compile_abstract(q)
    rs = classify(constraints, comp)
    if rs == {True}:
        return TruthValue.T
    if rs == {False}:
        return TruthValue.F
    return TruthValue.U


# -- abstract models -------------------------------------------------------------


def state_constraints(m: StateGraph, i: int, names) -> dict:
    out = {}
    vec = m.vectors[i]
    for a in names:
        if a not in m.attrs:
            raise CheckError(f"unknown attribute {a!r}")
        fn = m.abstractions[a]
        av = vec[m.attrs.index(a)]
        if av is UNKNOWN:
            out[a] = Constraint(a, fn.tag, None)
        else:
            out[a] = characteristic(fn, av)
    return out


@dataclass
class StateJudgement:
    outcome: str  # ok | skip | violation | incompatible
    detail: str = ""


def judge_abstract_state(m: StateGraph, i: int, comp: _Compiled, strict: bool = False) -> StateJudgement:
    names = sorted({a for a, _, _ in comp.atoms})
    cons = state_constraints(m, i, names)
    rs = classify(cons, comp)
    if strict and i != m.start and any(cons[a].undefined for a in names) and rs != {True}:
        return StateJudgement("violation", "unknown attribute (strict)")
    if rs == {False}:
        return StateJudgement("violation", "every concrete state violates the property")
    if False not in rs:
        return StateJudgement("ok" if True in rs else "skip")
    undecided = [comp.text[k] for k, (a, op, c) in enumerate(comp.atoms)
                 if not cons[a].undefined and _atom_solution(a, op, c, cons[a]) is not None
                 and not cons[a].domain.issubset(_atom_solution(a, op, c, cons[a]))
                 and not cons[a].domain.isdisjoint(_atom_solution(a, op, c, cons[a]))]
    return StateJudgement("incompatible", "abstraction too coarse for " + ", ".join(undecided or comp.text))


def check_asm(m: StateGraph, p, strict: bool = False, stats: Optional[dict] = None) -> Verdict:
    """G[q] on an abstract model: per-state validity of the abstraction's constraints."""
    if m.kind != ASM:
        raise CheckError(f"check_asm needs an abstract model, got {m.kind}")
    if not isinstance(p, G):
        raise CheckError("abstract models support only G[...] properties")
    comp = compile_abstract(p.body)
    fns = m.abstractions
    first_incompat = None
    violations = []
    decided = 0
    for i in range(m.num_states()):
        j = judge_abstract_state(m, i, comp, strict)
        if stats is not None:
            stats["validity_checks"] = stats.get("validity_checks", 0) + 1
        if j.outcome == "violation":
            violations.append((m.first_seq[i] if m.first_seq[i] is not None else -1, i, j))
        elif j.outcome == "incompatible" and first_incompat is None:
            first_incompat = (i, j)
        elif j.outcome == "ok":
            decided += 1
    body = pretty_print(p.body)
    if violations:
        _, i, j = min(violations)
        return Verdict(FALSE, Witness(i, m.first_seq[i], _vec_text(m.attrs, m.vectors[i], fns), body), j.detail)
    if first_incompat is not None:
        i, j = first_incompat
        return Verdict(INCOMPATIBLE, Witness(i, m.first_seq[i], _vec_text(m.attrs, m.vectors[i], fns), body),
                       j.detail)
    return Verdict(TRUE, detail="vacuous" if decided == 0 else f"{decided} abstract states valid")


def check_asm_bool(m: StateGraph, p, strict: bool = False) -> Verdict:
    for a, fn in m.abstractions.items():
        if not isinstance(fn, (BoolPred, Identity)):
            raise CheckError(f"{a} uses a range abstraction; use the multi-valued check")
    return check_asm(m, p, strict)


def check_asm_multi(m: StateGraph, p, strict: bool = False) -> Verdict:
    for a, fn in m.abstractions.items():
        if not isinstance(fn, (BoolPred, Identity, Range)):
            raise CheckError(f"unsupported abstraction for {a}")
    return check_asm(m, p, strict)


# -- path model ------------------------------------------------------------------


def path_nodes(m: StateGraph) -> dict:
    return {i: vec[0].slot for i, vec in enumerate(m.vectors) if isinstance(vec[0], PathClass)}


def _same_spec(a: PathSpec, b: PathSpec) -> bool:
    return a.attr == b.attr and all(set(x) == set(y) for x, y in zip(a.slots, b.slots))


def check_path(m: StateGraph, p) -> Verdict:
    """False iff the path model has an edge from the f1 node to the f3 node."""
    if m.kind != PATH:
        raise CheckError(f"check_path needs a path model, got {m.kind}")
    if not isinstance(p, P):
        raise CheckError("path models support only P[...] properties")
    spec = PathSpec.from_property(p)
    if m.path_spec is None or not _same_spec(spec, m.path_spec):
        raise CheckError("property does not match the path model's declaration")
    slots = path_nodes(m)
    bad = [(m.edge_first_seq[e], e) for e in m.counts if slots.get(e[0]) == 1 and slots.get(e[1]) == 3]
    if bad:
        seq, (a, b) = min(bad)
        return Verdict(FALSE, Witness(b, seq, {m.attrs[0]: label(None, m.vectors[b][0])}, pretty_print(p), (a, b)),
                       f"transition {m.path_spec.label(1)} -> {m.path_spec.label(3)} skips "
                       f"{m.path_spec.label(2)}")
    return Verdict(TRUE, detail="vacuous" if 1 not in slots.values() else f"{len(slots)} retained nodes")


def check(m, p, strict: bool = False) -> Verdict:
    """Dispatch on model kind."""
    if m.kind == LSM:
        return check_lsm(m, p, strict)
    if m.kind == DSM:
        return check_dsm(m, p, strict)
    if m.kind == ASM:
        return check_asm(m, p, strict)
    return check_path(m, p)
