"""Model dumps (JSON) and DOT rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .abstraction import (UNKNOWN, BoolAbs, Bucket, PathClass, PathSpec, Raw, describe, label,
                          parse_abstraction, value_text)
from .model import ASM, KINDS, LSM, PATH, LinearModel, StateGraph
from .propspec import parse_property, pretty_print
from .trace import UNDEF, decode_value, encode_value

VERSION = 1
COLORS = ("green", "red", "gray")


class SchemaError(ValueError):
    pass


@dataclass
class RenderOptions:
    highlight: dict = field(default_factory=dict)  # state key or node id -> color
    show_counts: bool = True
    label_mode: str = "full"  # full | compact

    def __post_init__(self):
        for k, c in self.highlight.items():
            if c not in COLORS:
                raise ValueError(f"color for {k!r} must be one of {', '.join(COLORS)}")
        if self.label_mode not in ("full", "compact"):
            raise ValueError("label_mode must be 'full' or 'compact'")


def _fns(m):
    return getattr(m, "abstractions", None) or {}


def component_text(m, attr: str, v) -> str:
    if v is UNDEF:
        return "?"
    fn = _fns(m).get(attr)
    if m.kind in (ASM, PATH):
        return label(fn, v)
    return value_text(v)


def state_key(m, i: int) -> str:
    """Canonical text for state ``i``: ``attr=value`` pairs joined by commas."""
    vec = m.vector(i)
    return ",".join(f"{a}={component_text(m, a, v)}" for a, v in zip(m.attrs, vec))


def _partial(vec) -> bool:
    return any(v is UNDEF or v is UNKNOWN for v in vec)


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(m, opts: RenderOptions = None) -> str:
    opts = opts or RenderOptions()
    lines = [f'digraph "{m.kind}" {{', "  node [shape=box, fontname=\"Helvetica\"];"]
    for i in range(m.num_states()):
        vec = m.vector(i)
        key = state_key(m, i)
        if opts.label_mode == "compact":
            text = ",".join(component_text(m, a, v) for a, v in zip(m.attrs, vec))
        else:
            text = key
        color = opts.highlight.get(key) or opts.highlight.get(f"s{i}")
        if color is None:
            if i == m.start:
                color = "green"
            elif _partial(vec):
                color = "gray"
        style = f', style=filled, fillcolor={color}' if color else ""
        lines.append(f'  s{i} [label="{_esc(text)}"{style}];')
    if m.kind == LSM:
        edges = [(a, b, 1) for a, b, _ in m.edges]
    else:
        edges = [(a, b, m.counts[(a, b)]) for a, b in m.edges]
    for a, b, n in edges:
        lab = f' [label="{n}"]' if opts.show_counts else ""
        lines.append(f"  s{a} -> s{b}{lab};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- JSON ------------------------------------------------------------------------


def _enc(v):
    if v is UNDEF:
        return {"t": "undef"}
    if v is UNKNOWN:
        return {"abs": "unknown"}
    if isinstance(v, BoolAbs):
        return {"abs": "bool", "v": v.value}
    if isinstance(v, Bucket):
        return {"abs": "bucket", "v": v.index}
    if isinstance(v, Raw):
        return {"abs": "raw", "v": encode_value(v.value)}
    if isinstance(v, PathClass):
        return {"abs": "path", "slot": v.slot, "label": v.label}
    return encode_value(v)


def _dec(obj):
    if not isinstance(obj, dict):
        raise SchemaError(f"bad value encoding {obj!r}")
    kind = obj.get("abs")
    if kind is None:
        if obj.get("t") == "undef":
            return UNDEF
        try:
            return decode_value(obj)
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    if kind == "unknown":
        return UNKNOWN
    if kind == "bool":
        return BoolAbs(bool(obj["v"]))
    if kind == "bucket":
        return Bucket(int(obj["v"]))
    if kind == "raw":
        return Raw(_dec(obj["v"]))
    if kind == "path":
        return PathClass(int(obj["slot"]), str(obj["label"]))
    raise SchemaError(f"unknown abstract value kind {kind!r}")


def to_json(m) -> str:
    doc = {"fsmrv": VERSION, "kind": m.kind, "attrs": list(m.attrs)}
    if m.kind == LSM:
        doc["writes"] = [[seq, m.attrs[k], _enc(new)] for seq, k, new, _old in m.deltas]
        doc["edges"] = [[a, b, seq] for a, b, seq in m.edges]
    else:
        doc["start"] = m.start
        doc["current"] = m.current
        doc["states"] = [{"key": state_key(m, i), "vector": [_enc(v) for v in vec], "firstSeq": m.first_seq[i]}
                         for i, vec in enumerate(m.vectors)]
        doc["edges"] = [{"from": a, "to": b, "count": m.counts[(a, b)], "firstSeq": m.edge_first_seq[(a, b)]}
                        for a, b in m.edges]
        if m.abstractions:
            doc["abstractions"] = {a: {"tag": fn.tag, "fn": _fn_text(fn)} for a, fn in m.abstractions.items()}
        if m.path_spec is not None:
            doc["path"] = {"name": m.path_spec.name, "property": pretty_print(m.path_spec.to_property())}
    return json.dumps(doc, ensure_ascii=False, indent=1)


def _fn_text(fn) -> str:
    d = describe(fn)
    return "identity" if d.startswith("identity(") else d


def from_json(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not JSON: {exc}") from None
    if not isinstance(doc, dict) or "fsmrv" not in doc:
        raise SchemaError("missing 'fsmrv' version field")
    if doc["fsmrv"] != VERSION:
        raise SchemaError(f"unsupported dump version {doc['fsmrv']!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"unknown model kind {kind!r}")
    attrs = doc.get("attrs")
    if not isinstance(attrs, list):
        raise SchemaError("'attrs' must be a list")
    try:
        if kind == LSM:
            m = LinearModel(attrs)
            for seq, name, val in doc["writes"]:
                m.add(seq, name, _dec(val))
            if [list(e) for e in m.edges] != doc.get("edges", [list(e) for e in m.edges]):
                raise SchemaError("edge list does not match writes")
            return m
        states = doc["states"]
        vecs = [tuple(_dec(v) for v in s["vector"]) for s in states]
        m = StateGraph(kind, attrs, vecs[0])
        for vec, s in zip(vecs[1:], states[1:]):
            m.node(vec, s["firstSeq"])
        m.first_seq[0] = states[0]["firstSeq"]
        for e in doc["edges"]:
            a, b = e["from"], e["to"]
            if not (0 <= a < len(vecs) and 0 <= b < len(vecs)) or e["count"] < 1:
                raise SchemaError(f"bad edge {e!r}")
            m.add_edge(a, b, e["firstSeq"], e["count"])
        m.start = doc.get("start", 0)
        m.current = doc.get("current", 0)
        if "abstractions" in doc:
            m.abstractions = {a: parse_abstraction(a, d["tag"], d["fn"]) for a, d in doc["abstractions"].items()}
        if "path" in doc:
            m.path_spec = PathSpec.from_property(parse_property(doc["path"]["property"]), doc["path"]["name"])
        return m
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed dump: {exc}") from None


def graph_equal(a, b) -> bool:
    """Same kind, attributes, vectors, edges and counts (LSMs: same write sequence)."""
    if a.kind != b.kind or tuple(a.attrs) != tuple(b.attrs):
        return False
    if a.kind == LSM:
        return [d[:3] for d in a.deltas] == [d[:3] for d in b.deltas]
    return (a.vectors == b.vectors and a.counts == b.counts and a.first_seq == b.first_seq
            and a.start == b.start and a.edge_first_seq == b.edge_first_seq)


def isomorphic(a: StateGraph, b: StateGraph) -> bool:
    """Graph equality up to node numbering (nodes matched by vector)."""
    if a.num_states() != b.num_states() or tuple(a.attrs) != tuple(b.attrs):
        return False
    ids = {}
    for i, vec in enumerate(a.vectors):
        j = b.ids.get(vec)
        if j is None:
            return False
        ids[i] = j
    return {(ids[x], ids[y]): n for (x, y), n in a.counts.items()} == b.counts


__all__ = ["RenderOptions", "SchemaError", "to_dot", "to_json", "from_json", "state_key", "graph_equal",
           "isomorphic"]
