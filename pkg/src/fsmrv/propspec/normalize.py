"""Verdict-preserving splitting of properties into independent conjuncts.

Rewrites (applied to fixpoint):

* ``A && B`` at top level                 -> ``[A, B]``
* ``G[P1 && ... && Pn]``                  -> ``[G[P1], ..., G[Pn]]``
* ``G[P -> (Q1 && ... && Qn)]``           -> ``[G[P -> Q1], ...]``
* ``P[(P1 || P2) ~~> Q ~~> R]``           -> ``[P[P1 ~~> Q ~~> R], P[P2 ~~> Q ~~> R]]``
* ``P[P1 ~~> Q ~~> (R1 || R2)]``          -> ``[P[P1 ~~> Q ~~> R1], P[P1 ~~> Q ~~> R2]]``

``G`` over ``||`` and a disjunctive middle slot of ``P`` are left alone:
those splits change the meaning.
"""

from __future__ import annotations

from .ast import BoolOp, G, P, conjuncts, disjuncts


def _split(p) -> list:
    if isinstance(p, BoolOp) and p.op == "&&":
        return conjuncts(p)
    if isinstance(p, G):
        body = p.body
        parts = conjuncts(body)
        if len(parts) > 1:
            return [G(q) for q in parts]
        if isinstance(body, BoolOp) and body.op == "->":
            rhs = conjuncts(body.rhs)
            if len(rhs) > 1:
                return [G(BoolOp("->", body.lhs, q)) for q in rhs]
        return [p]
    if isinstance(p, P):
        first = disjuncts(p.f1)
        if len(first) > 1:
            return [P(d, p.f2, p.f3) for d in first]
        last = disjuncts(p.f3)
        if len(last) > 1:
            return [P(p.f1, p.f2, d) for d in last]
    return [p]


def normalize(p) -> list:
    """Split ``p`` into properties whose conjunction is equivalent to ``p``."""
    out = []
    work = [p]
    while work:
        q = work.pop(0)
        parts = _split(q)
        if len(parts) == 1 and parts[0] == q:
            out.append(q)
        else:
            work[:0] = parts
    return out
