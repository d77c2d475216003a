"""Execution events, the line-delimited trace format, and key-attribute ingestion.

A trace is a sequence of JSON records, one per line.  Field writes carry a
typed value ``{"t": tag, "v": payload}``; method entry/exit events carry a
qualified method name.  Ingestion turns the raw event stream into a stream of
:class:`KeyWrite` records (``name <- value`` at ``seq``) which is what every
model builder consumes.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

FIELD_WRITE = "fieldWrite"
METHOD_ENTRY = "methodEntry"
METHOD_EXIT = "methodExit"
KINDS = (FIELD_WRITE, METHOD_ENTRY, METHOD_EXIT)

TAGS = ("int", "real", "bool", "str", "intList")

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

EARTH_RADIUS_M = 6_371_000.0

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

Value = Union[int, float, bool, str, tuple]


class TraceError(ValueError):
    """Malformed or out-of-order trace input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class KeyTypeError(TypeError):
    pass


class _Undefined:
    """The value of a key attribute that has not been written yet."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "?"

    def __reduce__(self):
        return (_Undefined, ())


UNDEF = _Undefined()


def value_tag(v) -> str:
    # bool before int: bool is an int subclass
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "real"
    if isinstance(v, str):
        return "str"
    if isinstance(v, tuple):
        return "intList"
    raise TypeError(f"not a trace value: {v!r}")


def _check_int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValueError(f"expected integer, got {x!r}")
    if not INT64_MIN <= x <= INT64_MAX:
        raise ValueError(f"integer {x} outside 64-bit range")
    return x


def decode_value(obj) -> Value:
    """Decode a ``{"t": tag, "v": payload}`` object into a Python value."""
    if not isinstance(obj, dict) or "t" not in obj or "v" not in obj:
        raise ValueError("value must be an object with 't' and 'v'")
    tag, payload = obj["t"], obj["v"]
    if tag == "int":
        return _check_int(payload)
    if tag == "real":
        if isinstance(payload, bool) or not isinstance(payload, (int, float)):
            raise ValueError(f"real payload must be a number, got {payload!r}")
        return float(payload)
    if tag == "bool":
        if not isinstance(payload, bool):
            raise ValueError(f"bool payload must be true/false, got {payload!r}")
        return payload
    if tag == "str":
        if not isinstance(payload, str):
            raise ValueError(f"str payload must be a string, got {payload!r}")
        return payload
    if tag == "intList":
        if not isinstance(payload, list):
            raise ValueError(f"intList payload must be an array, got {payload!r}")
        return tuple(_check_int(x) for x in payload)
    raise ValueError(f"unknown value tag {tag!r}")


def encode_value(v: Value) -> dict:
    tag = value_tag(v)
    return {"t": tag, "v": list(v) if tag == "intList" else v}


@dataclass(slots=True)
class Event:
    seq: int
    kind: str
    thread: str
    cls: Optional[str] = None
    instance: Optional[int] = None
    field: Optional[str] = None
    value: Optional[Value] = None
    method: Optional[str] = None

    @property
    def qualified_name(self) -> str:
        return self.cls if self.kind == FIELD_WRITE else self.method

    def to_record(self) -> dict:
        rec = {"seq": self.seq, "kind": self.kind, "thread": self.thread}
        if self.kind == FIELD_WRITE:
            rec["class"] = self.cls
            if self.instance is not None:
                rec["instance"] = self.instance
            rec["field"] = self.field
            rec["value"] = encode_value(self.value)
        else:
            rec["method"] = self.method
        return rec

    def to_line(self) -> str:
        return json.dumps(self.to_record(), separators=(",", ":"), ensure_ascii=False)


_decode_json = json.JSONDecoder().decode


def _need_str(rec: dict, key: str) -> str:
    v = rec.get(key)
    if not isinstance(v, str) or not v:
        raise ValueError(f"missing or non-text field {key!r}")
    return v


def parse_event(line: str, lineno: Optional[int] = None) -> Event:
    """Decode one trace record.  Unknown keys in the record are ignored."""
    try:
        rec = _decode_json(line)
    except json.JSONDecodeError as exc:
        raise TraceError(f"malformed record: {exc.msg}", lineno) from None
    if not isinstance(rec, dict):
        raise TraceError("record must be a JSON object", lineno)
    try:
        seq = rec.get("seq")
        if isinstance(seq, bool) or not isinstance(seq, int):
            raise ValueError("seq must be an integer")
        if seq < 1:
            raise ValueError("seq must be ≥ 1")
        kind = rec.get("kind")
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        thread = _need_str(rec, "thread")
        if kind == FIELD_WRITE:
            if "value" not in rec:
                raise ValueError("fieldWrite without value")
            inst = rec.get("instance")
            if inst is not None:
                if isinstance(inst, bool) or not isinstance(inst, int) or inst < 1:
                    raise ValueError("instance must be an integer ≥ 1")
            return Event(seq, kind, thread, cls=_need_str(rec, "class"), instance=inst,
                         field=_need_str(rec, "field"), value=decode_value(rec["value"]))
        if "value" in rec:
            raise ValueError("method events carry no value")
        return Event(seq, kind, thread, method=_need_str(rec, "method"))
    except ValueError as exc:
        raise TraceError(str(exc), lineno) from None


@dataclass(frozen=True)
class InclusionFilter:
    """Qualified-name prefixes; a trailing ``*`` is a prefix wildcard."""

    patterns: tuple = ()

    def matches(self, qname: str) -> bool:
        if not self.patterns:
            return True
        for pat in self.patterns:
            if pat.endswith("*"):
                if qname.startswith(pat[:-1]):
                    return True
            elif qname == pat or qname.startswith(pat + "."):
                return True
        return False


def read_trace(source: Union[IO, Iterable], filt: InclusionFilter = InclusionFilter()) -> Iterator[Event]:
    """Lazily decode a newline-delimited trace, keeping events the filter admits.

    ``source`` may yield ``str`` or ``bytes`` lines.  Blank lines are skipped.
    Sequence numbers must strictly increase across *all* records, including the
    ones the filter drops.
    """
    last = 0
    for lineno, raw in enumerate(source, 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        ev = parse_event(raw, lineno)
        if ev.seq <= last:
            raise TraceError(f"out-of-order seq {ev.seq} after {last}", lineno)
        last = ev.seq
        if filt.matches(ev.qualified_name):
            yield ev


# -- key attributes -----------------------------------------------------------


@dataclass(frozen=True)
class KeyAttribute:
    name: str
    cls: str
    field: str
    tag: str
    instance: Optional[int] = None  # None: instance-agnostic selector p.c.f

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise ValueError(f"bad attribute name {self.name!r}")
        if self.tag not in TAGS:
            raise ValueError(f"unknown value tag {self.tag!r}")

    @property
    def selector(self) -> str:
        inst = "" if self.instance is None else f":{self.instance}"
        return f"{self.cls}{inst}.{self.field}"


def parse_selector(text: str) -> tuple:
    """``p.c:i.f`` -> (class, instance, field); ``p.c.f`` -> (class, None, field)."""
    text = text.strip()
    m = re.fullmatch(r"([A-Za-z_$][\w$.]*):(\d+)\.([A-Za-z_$][\w$]*)", text)
    if m:
        inst = int(m.group(2))
        if inst < 1:
            raise ValueError(f"instance must be ≥ 1 in {text!r}")
        return m.group(1), inst, m.group(3)
    m = re.fullmatch(r"([A-Za-z_$][\w$.]*)\.([A-Za-z_$][\w$]*)", text)
    if m:
        return m.group(1), None, m.group(2)
    raise ValueError(f"bad key selector {text!r}")


class KeyAttributeSet:
    """Ordered set of key attributes with O(1) selector lookup."""

    def __init__(self, keys: Iterable[KeyAttribute] = ()):
        self.keys = list(keys)
        self._by_name = {}
        self._specific = {}
        self._agnostic = {}
        for k in self.keys:
            if k.name in self._by_name:
                raise ValueError(f"duplicate key attribute {k.name!r}")
            self._by_name[k.name] = k
            table = self._agnostic if k.instance is None else self._specific
            sel = (k.cls, k.field) if k.instance is None else (k.cls, k.instance, k.field)
            if sel in table:
                raise ValueError(f"selector {k.selector} declared twice")
            table[sel] = k

    @property
    def names(self) -> tuple:
        return tuple(k.name for k in self.keys)

    def __contains__(self, name):
        return name in self._by_name

    def __getitem__(self, name) -> KeyAttribute:
        return self._by_name[name]

    def __iter__(self):
        return iter(self.keys)

    def __len__(self):
        return len(self.keys)

    def lookup(self, cls: str, instance: Optional[int], fld: str) -> Optional[KeyAttribute]:
        if instance is not None:
            k = self._specific.get((cls, instance, fld))
            if k is not None:
                return k
        return self._agnostic.get((cls, fld))


def match_key(event: Event, keys: KeyAttributeSet) -> Optional[tuple]:
    """Return ``(attribute name, value)`` if the write hits a key attribute."""
    if event.kind != FIELD_WRITE:
        return None
    k = keys.lookup(event.cls, event.instance, event.field)
    if k is None:
        return None
    tag = value_tag(event.value)
    if tag != k.tag:
        raise KeyTypeError(f"seq {event.seq}: attribute {k.name!r} expects {k.tag}, got {tag}")
    return k.name, event.value


# -- control attributes -------------------------------------------------------

CONTROL_FIELD = "__ctl"
CONTROL_LEVELS = ("package", "class", "method", "thread")


def derive_control(event: Event, level: str) -> Optional[Event]:
    """Synthesize a ``__ctl`` write describing the current execution location."""
    if level not in CONTROL_LEVELS:
        raise ValueError(f"unknown control level {level!r}")
    if event.kind != METHOD_ENTRY:
        return None
    parts = event.method.split(".")
    # need at least package, class and method components
    if len(parts) < 3 or not all(parts):
        raise ValueError(f"seq {event.seq}: cannot split {event.method!r} into package.Class.method")
    if level == "package":
        v = ".".join(parts[:-2])
    elif level == "class":
        v = ".".join(parts[:-1])
    elif level == "method":
        v = event.method
    else:
        v = f"{event.thread}#{event.method}"
    return Event(event.seq, FIELD_WRITE, event.thread, cls="", field=CONTROL_FIELD, value=v)


# -- derived attributes -------------------------------------------------------


def haversine(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def bearing(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Initial bearing from point 1 to point 2, degrees clockwise from north in [0, 360)."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    y = math.sin(dl) * math.cos(p2)
    x = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl)
    return math.degrees(math.atan2(y, x)) % 360.0


COMPASS_POINTS = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")


def compass(lat: float, lon: float, ref_lat: float, ref_lon: float, epsilon: float = 1.0) -> str:
    if haversine(ref_lat, ref_lon, lat, lon) < epsilon:
        return "C"
    b = bearing(ref_lat, ref_lon, lat, lon)
    # N covers [-22.5, 22.5)
    return COMPASS_POINTS[int(((b + 22.5) % 360.0) // 45.0)]


@dataclass(frozen=True)
class DerivationRule:
    out: str
    fn: str  # "haversine" | "compass"
    lat: str
    lon: str
    ref_lat: float
    ref_lon: float
    epsilon: float = 1.0

    def __post_init__(self):
        if self.fn not in ("haversine", "compass"):
            raise ValueError(f"unknown derivation {self.fn!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")

    @property
    def tag(self) -> str:
        return "real" if self.fn == "haversine" else "str"

    @property
    def inputs(self) -> tuple:
        return (self.lat, self.lon)

    def compute(self, lat: float, lon: float) -> Value:
        if self.fn == "haversine":
            return haversine(lat, lon, self.ref_lat, self.ref_lon)
        return compass(lat, lon, self.ref_lat, self.ref_lon, self.epsilon)


def derive_attributes(event: Event, rules: Iterable[DerivationRule], history: dict) -> list:
    """Synthetic writes for every rule fed by the attribute ``event`` just wrote.

    ``event`` must already be a key write (``field`` holds the attribute name);
    ``history`` maps attribute names to their latest values and should already
    include this write.
    """
    out = []
    for rule in rules:
        if event.field not in rule.inputs:
            continue
        lat, lon = history.get(rule.lat, UNDEF), history.get(rule.lon, UNDEF)
        if lat is UNDEF or lon is UNDEF:
            continue
        out.append(Event(event.seq, FIELD_WRITE, event.thread, cls="", field=rule.out,
                         value=rule.compute(float(lat), float(lon))))
    return out


# -- ingestion ----------------------------------------------------------------


@dataclass(slots=True)
class KeyWrite:
    seq: int
    name: str
    value: Value


@dataclass
class Ingestor:
    """Turns raw events into key-attribute writes.

    Field writes matching a key attribute become writes of that attribute;
    method entries feed the declared control attributes; derivation rules fire
    after each write of one of their inputs.  Writes to attributes outside
    ``attrs`` (when given) are computed but not emitted, so derivation inputs
    need not be part of the state vector.
    """

    keys: KeyAttributeSet
    controls: dict = field(default_factory=dict)  # attribute name -> level
    rules: list = field(default_factory=list)
    attrs: Optional[tuple] = None
    history: dict = field(default_factory=dict)

    def __post_init__(self):
        self._emit = None if self.attrs is None else frozenset(self.attrs)
        # rules whose output nobody reads are skipped
        needed = None if self._emit is None else self._emit | {i for r in self.rules for i in r.inputs}
        self._rules = {}
        for r in self.rules:
            if needed is None or r.out in needed:
                for i in r.inputs:
                    self._rules.setdefault(i, []).append(r)

    def feed(self, ev: Event) -> list:
        writes = []
        if ev.kind == FIELD_WRITE:
            hit = match_key(ev, self.keys)
            if hit is not None:
                name, value = hit
                self._record(ev.seq, name, value, writes)
                for r in self._rules.get(name, ()):
                    lat, lon = self.history.get(r.lat, UNDEF), self.history.get(r.lon, UNDEF)
                    if lat is not UNDEF and lon is not UNDEF:
                        self._record(ev.seq, r.out, r.compute(float(lat), float(lon)), writes)
        elif ev.kind == METHOD_ENTRY:
            for name, level in self.controls.items():
                c = derive_control(ev, level)
                self._record(c.seq, name, c.value, writes)
        return writes

    def _record(self, seq, name, value, writes):
        self.history[name] = value
        if self._emit is None or name in self._emit:
            writes.append(KeyWrite(seq, name, value))

    def run(self, events: Iterable[Event]) -> Iterator[KeyWrite]:
        for ev in events:
            yield from self.feed(ev)
