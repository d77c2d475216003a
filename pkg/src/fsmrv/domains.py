"""Decidable value sets used as characteristic constraints.

Numeric sets are unions of intervals over the extended reals; for integer
attributes they are kept in integer-closed normal form so containment and
disjointness are decided over the integers.  Text and boolean sets are finite
sets or complements of finite sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

INF = math.inf


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        # infinite ends are always open
        if self.lo == -INF and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if self.hi == INF and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def contains(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def text(self) -> str:
        if self.lo == -INF and self.hi == INF:
            return "(-inf:inf)"
        if self.lo == -INF:
            return f"{'<=' if self.hi_closed else '<'}{_num(self.hi)}"
        if self.hi == INF:
            return f"{'>=' if self.lo_closed else '>'}{_num(self.lo)}"
        if self.lo == self.hi:
            return f"={_num(self.lo)}"
        return f"{'[' if self.lo_closed else '('}{_num(self.lo)}:{_num(self.hi)}{']' if self.hi_closed else ')'}"


def _num(x) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _integerize(iv: Interval) -> Optional[Interval]:
    if iv.empty() or iv.lo == INF or iv.hi == -INF:
        return None
    lo, hi = iv.lo, iv.hi
    if lo != -INF:
        c = math.ceil(lo)
        lo = c + 1 if (c == lo and not iv.lo_closed) else c
    if hi != INF:
        f = math.floor(hi)
        hi = f - 1 if (f == hi and not iv.hi_closed) else f
    out = Interval(lo, hi, True, True)
    return None if out.empty() else out


class IntervalSet:
    """Normalized union of intervals."""

    __slots__ = ("intervals", "discrete")

    def __init__(self, intervals=(), discrete: bool = False):
        self.discrete = discrete
        self.intervals = self._normalize(list(intervals), discrete)

    @classmethod
    def full(cls, discrete=False):
        return cls([Interval(-INF, INF, False, False)], discrete)

    @classmethod
    def point(cls, x, discrete=False):
        return cls([Interval(x, x, True, True)], discrete)

    @classmethod
    def atom(cls, op: str, c, discrete=False):
        """Solution set of ``x op c``."""
        if op == "<":
            ivs = [Interval(-INF, c, False, False)]
        elif op == "<=":
            ivs = [Interval(-INF, c, False, True)]
        elif op == ">":
            ivs = [Interval(c, INF, False, False)]
        elif op == ">=":
            ivs = [Interval(c, INF, True, False)]
        elif op == "==":
            ivs = [Interval(c, c, True, True)]
        elif op == "!=":
            ivs = [Interval(-INF, c, False, False), Interval(c, INF, False, False)]
        else:
            raise ValueError(f"unsupported numeric operator {op!r}")
        return cls(ivs, discrete)

    @staticmethod
    def _normalize(ivs, discrete):
        if discrete:
            ivs = [j for j in (_integerize(i) for i in ivs) if j is not None]
        ivs = sorted((i for i in ivs if not i.empty()), key=lambda i: (i.lo, not i.lo_closed))
        out = []
        for iv in ivs:
            if out:
                last = out[-1]
                touches = iv.lo < last.hi or (iv.lo == last.hi and (iv.lo_closed or last.hi_closed))
                if discrete and last.hi != INF and iv.lo == last.hi + 1:
                    touches = True
                if touches:
                    if iv.hi > last.hi or (iv.hi == last.hi and iv.hi_closed):
                        out[-1] = Interval(last.lo, iv.hi, last.lo_closed, iv.hi_closed)
                    continue
            out.append(iv)
        return tuple(out)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return f"IntervalSet({self.text()})"

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x) -> bool:
        return any(i.contains(x) for i in self.intervals)

    def complement(self) -> "IntervalSet":
        out = []
        lo, lo_closed = -INF, False
        for iv in self.intervals:
            out.append(Interval(lo, iv.lo, lo_closed, not iv.lo_closed))
            lo, lo_closed = iv.hi, not iv.hi_closed
        out.append(Interval(lo, INF, lo_closed, False))
        return IntervalSet(out, self.discrete)

    def union(self, other) -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals, self.discrete)

    def intersect(self, other) -> "IntervalSet":
        return self.complement().union(other.complement()).complement()

    def issubset(self, other) -> bool:
        return self.intersect(other.complement()).is_empty()

    def isdisjoint(self, other) -> bool:
        return self.intersect(other).is_empty()

    def endpoints(self) -> list:
        pts = []
        for i in self.intervals:
            pts += [x for x in (i.lo, i.hi) if x not in (-INF, INF)]
        return pts

    def text(self) -> str:
        if not self.intervals:
            return "{}"
        return " | ".join(i.text() for i in self.intervals)


class ValueSet:
    """Finite set, or complement of a finite set when ``negated``."""

    __slots__ = ("values", "negated", "universe")

    def __init__(self, values=(), negated: bool = False, universe=None):
        values = frozenset(values)
        self.universe = universe
        if universe is not None:
            if negated:
                values = universe - values
            negated = False
        self.values = values
        self.negated = negated

    @classmethod
    def full(cls, universe=None):
        return cls((), True, universe)

    def __eq__(self, other):
        return isinstance(other, ValueSet) and (self.values, self.negated) == (other.values, other.negated)

    def __hash__(self):
        return hash((self.values, self.negated))

    def __repr__(self):
        return f"ValueSet({self.text()})"

    def contains(self, x) -> bool:
        return (x in self.values) != self.negated

    def complement(self) -> "ValueSet":
        return ValueSet(self.values, not self.negated, self.universe)

    def union(self, other) -> "ValueSet":
        a, b = self, other
        u = a.universe or b.universe
        if not a.negated and not b.negated:
            return ValueSet(a.values | b.values, False, u)
        if a.negated and b.negated:
            return ValueSet(a.values & b.values, True, u)
        if a.negated:
            a, b = b, a
        return ValueSet(b.values - a.values, True, u)

    def intersect(self, other) -> "ValueSet":
        return self.complement().union(other.complement()).complement()

    def is_empty(self) -> bool:
        return not self.negated and not self.values

    def issubset(self, other) -> bool:
        return self.intersect(other.complement()).is_empty()

    def isdisjoint(self, other) -> bool:
        return self.intersect(other).is_empty()

    def text(self) -> str:
        body = ", ".join(sorted(_show(v) for v in self.values))
        if self.negated:
            return "∼{" + body + "}" if body else "(any)"
        return "{" + body + "}"


def _show(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


BOOLS = frozenset({True, False})


def bool_domain_full() -> ValueSet:
    return ValueSet.full(BOOLS)


@dataclass(frozen=True)
class Constraint:
    """The set of concrete values an abstract component stands for.

    ``domain`` is an :class:`IntervalSet` or :class:`ValueSet`; ``None`` marks
    an attribute whose value is still undefined.
    """

    attr: str
    tag: str
    domain: object = None

    @property
    def undefined(self) -> bool:
        return self.domain is None

    def contains(self, v) -> bool:
        return self.domain is not None and self.domain.contains(v)

    def text(self) -> str:
        return "?" if self.domain is None else self.domain.text()


def full_domain(tag: str):
    if tag == "int":
        return IntervalSet.full(discrete=True)
    if tag == "real":
        return IntervalSet.full()
    if tag == "bool":
        return bool_domain_full()
    return ValueSet.full()


def point_domain(tag: str, v):
    if tag in ("int", "real"):
        return IntervalSet.point(v, discrete=tag == "int")
    return ValueSet({v}, universe=BOOLS if tag == "bool" else None)
