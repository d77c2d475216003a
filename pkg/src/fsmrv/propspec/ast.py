"""Property AST.  Nodes are frozen dataclasses, so structural equality is ``==``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class Node:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def walk(self) -> Iterator["Node"]:
        yield self
        for c in self.children():
            yield from c.walk()


@dataclass(frozen=True)
class Lit(Node):
    value: Union[int, float, str, bool, tuple]


@dataclass(frozen=True)
class Var(Node):
    name: str
    primed: bool = False


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class Arith(Node):
    op: str  # + - * /
    lhs: Node
    rhs: Node

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True)
class ListOp(Node):
    var: Var
    op: str  # min max size

    def children(self):
        return (self.var,)


@dataclass(frozen=True)
class RangeList(Node):
    lo: Node
    hi: Node

    def children(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class ListLit(Node):
    items: tuple

    def children(self):
        return self.items


@dataclass(frozen=True)
class Rel(Node):
    op: str  # == != < <= > >=
    lhs: Node
    rhs: Node

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True)
class In(Node):
    elem: Node
    lst: Node

    def children(self):
        return (self.elem, self.lst)


@dataclass(frozen=True)
class Not(Node):
    body: Node

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class BoolOp(Node):
    op: str  # -> && ||
    lhs: Node
    rhs: Node

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True)
class Quant(Node):
    kind: str  # all exists
    var: str
    lst: Node
    body: Node

    def children(self):
        return (self.lst, self.body)


@dataclass(frozen=True)
class G(Node):
    body: Node

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class F(Node):
    body: Node

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class P(Node):
    f1: Node
    f2: Node
    f3: Node

    def children(self):
        return (self.f1, self.f2, self.f3)


TEMPORAL = (G, F, P)


def is_temporal(n: Node) -> bool:
    return isinstance(n, TEMPORAL)


def has_temporal(n: Node) -> bool:
    return any(isinstance(x, TEMPORAL) for x in n.walk())


def has_primes(n: Node) -> bool:
    return any(isinstance(x, Var) and x.primed for x in n.walk())


def free_vars(n: Node, bound: frozenset = frozenset()) -> set:
    """Attribute names referenced by ``n`` (iterator variables excluded)."""
    if isinstance(n, Var):
        return set() if n.name in bound else {n.name}
    if isinstance(n, Quant):
        return free_vars(n.lst, bound) | free_vars(n.body, bound | {n.var})
    out = set()
    for c in n.children():
        out |= free_vars(c, bound)
    return out


def conjuncts(n: Node) -> list:
    if isinstance(n, BoolOp) and n.op == "&&":
        return conjuncts(n.lhs) + conjuncts(n.rhs)
    return [n]


def disjuncts(n: Node) -> list:
    if isinstance(n, BoolOp) and n.op == "||":
        return disjuncts(n.lhs) + disjuncts(n.rhs)
    return [n]


def join(op: str, parts: list) -> Node:
    out = parts[0]
    for p in parts[1:]:
        out = BoolOp(op, out, p)
    return out
