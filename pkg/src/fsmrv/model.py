"""State-graph representations and the linear / distinct model builders.

A state vector is a tuple aligned with ``Model.attrs``; unwritten components
hold :data:`~fsmrv.trace.UNDEF` (or ``Unknown`` in abstract models).
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional, Sequence

from .trace import UNDEF, KeyWrite

LSM, DSM, ASM, PATH = "LSM", "DSM", "ASM", "PathModel"
KINDS = (LSM, DSM, ASM, PATH)

_CHECKPOINT = 1024


class Model:
    kind: str
    attrs: tuple
    start: int = 0

    def index_of(self, name: str) -> int:
        return self.attrs.index(name)

    def num_states(self) -> int:
        raise NotImplementedError

    def vector(self, i: int) -> tuple:
        raise NotImplementedError

    def as_dict(self, i: int) -> dict:
        return dict(zip(self.attrs, self.vector(i)))


class LinearModel(Model):
    """Linear state model: one state per key write, in trace order.

    Only the writes are stored (attribute index, new value, old value, seq);
    vectors are rebuilt on demand from periodic checkpoints.
    """

    kind = LSM

    def __init__(self, attrs: Sequence[str]):
        self.attrs = tuple(attrs)
        self._index = {a: i for i, a in enumerate(self.attrs)}
        self._cur = [UNDEF] * len(self.attrs)
        self.deltas = []  # (seq, attr index, new, old)
        self._checkpoints = [tuple(self._cur)]

    def add(self, seq: int, name: str, value) -> int:
        k = self._index[name]
        old = self._cur[k]
        self._cur[k] = value
        self.deltas.append((seq, k, value, old))
        if len(self.deltas) % _CHECKPOINT == 0:
            self._checkpoints.append(tuple(self._cur))
        return len(self.deltas)

    def num_states(self) -> int:
        return len(self.deltas) + 1

    @property
    def edges(self) -> list:
        """``(from, to, seq)`` in trace order."""
        return [(i, i + 1, d[0]) for i, d in enumerate(self.deltas)]

    def num_edges(self) -> int:
        return len(self.deltas)

    def seq_of(self, i: int) -> Optional[int]:
        """Seq of the write that created state ``i`` (None for the start state)."""
        return self.deltas[i - 1][0] if i > 0 else None

    def vector(self, i: int) -> tuple:
        if not 0 <= i <= len(self.deltas):
            raise IndexError(i)
        base = i // _CHECKPOINT
        v = list(self._checkpoints[base])
        for _, k, new, _old in self.deltas[base * _CHECKPOINT:i]:
            v[k] = new
        return tuple(v)

    def states(self) -> Iterator[tuple]:
        v = [UNDEF] * len(self.attrs)
        yield tuple(v)
        for _, k, new, _old in self.deltas:
            v[k] = new
            yield tuple(v)

    @property
    def first_seq(self) -> list:
        return [None] + [d[0] for d in self.deltas]


class StateGraph(Model):
    """Distinct, abstract, or path model: one node per distinct vector.

    ``counts`` maps ``(from, to)`` node indices to transition counts and
    ``edge_first_seq`` to the seq of the first transition that created the edge.
    """

    def __init__(self, kind: str, attrs: Sequence[str], start_vector: tuple):
        if kind not in (DSM, ASM, PATH):
            raise ValueError(f"not a graph model kind: {kind}")
        self.kind = kind
        self.attrs = tuple(attrs)
        self.vectors = [start_vector]
        self.ids = {start_vector: 0}
        self.first_seq = [None]
        self.counts = {}
        self.edge_first_seq = {}
        self.start = 0
        self.current = 0
        self.abstractions = None  # attribute name -> AbstractionFunction, for ASMs
        self.path_spec = None

    def num_states(self) -> int:
        return len(self.vectors)

    def vector(self, i: int) -> tuple:
        return self.vectors[i]

    def states(self) -> Iterator[tuple]:
        return iter(self.vectors)

    def node(self, vec: tuple, seq) -> tuple:
        """Index of ``vec``, creating it if needed; returns (index, created)."""
        i = self.ids.get(vec)
        if i is not None:
            return i, False
        i = len(self.vectors)
        self.vectors.append(vec)
        self.ids[vec] = i
        self.first_seq.append(seq)
        return i, True

    def add_edge(self, a: int, b: int, seq, n: int = 1) -> bool:
        """Count a transition; True if the edge is new."""
        e = (a, b)
        c = self.counts.get(e)
        self.counts[e] = (c or 0) + n
        if c is None:
            self.edge_first_seq[e] = seq
            return True
        return False

    def step(self, vec: tuple, seq) -> tuple:
        """Move from the current node to ``vec``; returns (prev, new, new_state, new_edge)."""
        prev = self.current
        i, created = self.node(vec, seq)
        new_edge = self.add_edge(prev, i, seq)
        self.current = i
        return prev, i, created, new_edge

    @property
    def edges(self) -> list:
        return sorted(self.counts)

    def num_edges(self) -> int:
        return len(self.counts)

    def successors(self, i: int) -> list:
        return sorted(b for (a, b) in self.counts if a == i)

    def successor_map(self) -> dict:
        out = {i: [] for i in range(len(self.vectors))}
        for a, b in sorted(self.counts):
            out[a].append(b)
        return out

    def total_transitions(self) -> int:
        return sum(self.counts.values())


def _names(keys) -> tuple:
    return tuple(keys.names if hasattr(keys, "names") else keys)


def build_lsm(writes: Iterable[KeyWrite], keys) -> LinearModel:
    """Fold key writes into a linear state model.

    ``keys`` is a :class:`~fsmrv.trace.KeyAttributeSet` or a sequence of
    attribute names; writes to other attributes are skipped.
    """
    m = LinearModel(_names(keys))
    idx = m._index
    for w in writes:
        if w.name in idx:
            m.add(w.seq, w.name, w.value)
    return m


class GraphBuilder:
    """Incremental DSM/ASM construction; ``fns`` maps names to abstraction functions."""

    def __init__(self, keys, fns: Optional[dict] = None):
        attrs = _names(keys)
        self.attrs = attrs
        self._index = {a: i for i, a in enumerate(attrs)}
        if fns is None:
            self.model = StateGraph(DSM, attrs, (UNDEF,) * len(attrs))
            self._fns = None
        else:
            from .abstraction import UNKNOWN, apply_abstraction

            missing = [a for a in attrs if a not in fns]
            if missing:
                raise ValueError(f"no abstraction function for {', '.join(missing)}")
            self.model = StateGraph(ASM, attrs, (UNKNOWN,) * len(attrs))
            self.model.abstractions = {a: fns[a] for a in attrs}
            self._fns = [fns[a] for a in attrs]
            self._apply = apply_abstraction
        self._cur = list(self.model.vectors[0])

    def add(self, w: KeyWrite) -> Optional[tuple]:
        k = self._index.get(w.name)
        if k is None:
            return None
        if self._fns is None:
            self._cur[k] = w.value
        else:
            try:
                self._cur[k] = self._apply(w.value, self._fns[k])
            except (TypeError, ValueError) as exc:
                raise type(exc)(f"seq {w.seq}: {exc}") from None
        return self.model.step(tuple(self._cur), w.seq)


def build_dsm(writes: Iterable[KeyWrite], keys) -> StateGraph:
    b = GraphBuilder(keys)
    for w in writes:
        b.add(w)
    return b.model


def collapse(lsm: LinearModel) -> StateGraph:
    """Merge duplicate LSM vectors; an independent route to the DSM."""
    g = StateGraph(DSM, lsm.attrs, (UNDEF,) * len(lsm.attrs))
    states = lsm.states()
    prev = g.node(next(states), None)[0]
    for (seq, *_), vec in zip(lsm.deltas, states):
        cur = g.node(vec, seq)[0]
        g.add_edge(prev, cur, seq)
        prev = cur
    g.current = prev
    return g


def is_defined(vec: tuple) -> bool:
    """True if no component is undefined / unknown."""
    from .abstraction import UNKNOWN

    return all(v is not UNDEF and v is not UNKNOWN for v in vec)
