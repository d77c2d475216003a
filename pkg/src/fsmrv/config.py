"""Spec-file parsing: key attributes, controls, derivations, abstractions, properties.

One declaration per line.  ``#`` starts a comment at the beginning of a line
or after whitespace (so ``up#min`` inside a property is untouched).  Indented
lines continue the previous declaration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .abstraction import AbstractionError, Identity, PathSpec, parse_abstraction
from .propspec import PropertySyntaxError, parse_property
from .trace import (CONTROL_LEVELS, TAGS, DerivationRule, InclusionFilter, Ingestor, KeyAttribute,
                    KeyAttributeSet, parse_selector)

IDENT = r"[A-Za-z_][A-Za-z0-9_]*"


class SpecError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class PropDecl:
    name: str
    text: str
    ast: object


@dataclass
class PathDecl:
    name: str
    spec: PathSpec


@dataclass
class SpecConfig:
    keys: KeyAttributeSet = field(default_factory=KeyAttributeSet)
    controls: dict = field(default_factory=dict)  # name -> level
    rules: list = field(default_factory=list)
    filters: list = field(default_factory=list)
    abstractions: dict = field(default_factory=dict)  # name -> AbstractionFunction
    paths: list = field(default_factory=list)
    props: list = field(default_factory=list)
    attrs: Optional[tuple] = None
    buffer: int = 1024

    def tags(self) -> dict:
        out = {k.name: k.tag for k in self.keys}
        out.update({c: "str" for c in self.controls})
        out.update({r.out: r.tag for r in self.rules})
        return out

    def state_attrs(self) -> tuple:
        if self.attrs is not None:
            return self.attrs
        return tuple(self.keys.names) + tuple(self.controls) + tuple(r.out for r in self.rules)

    def model_attrs(self, kind: str) -> tuple:
        """State vector of the whole-trace model: abstract models default to the abstracted attributes."""
        if self.attrs is None and kind == "ASM" and self.has_abstraction():
            return tuple(a for a in self.state_attrs() if a in self.abstractions)
        return self.state_attrs()

    def projection(self, names) -> tuple:
        """State attributes among ``names``, in state-vector order."""
        attrs = self.state_attrs()
        tags = self.tags()
        for n in names:
            if n not in attrs:
                where = "declared but not in the state vector" if n in tags else "unknown"
                raise ValueError(f"attribute {n!r} is {where}")
        return tuple(a for a in attrs if a in names)

    def inclusion_filter(self) -> InclusionFilter:
        return InclusionFilter(tuple(self.filters))

    def ingestor(self, attrs: Optional[tuple] = None) -> Ingestor:
        return Ingestor(self.keys, dict(self.controls), list(self.rules),
                        attrs=tuple(attrs or self.state_attrs()))

    def abstraction_fns(self, attrs: Optional[tuple] = None) -> dict:
        tags = self.tags()
        return {a: self.abstractions.get(a) or Identity(a, tags[a]) for a in (attrs or self.state_attrs())}

    def has_abstraction(self) -> bool:
        return any(not isinstance(f, Identity) for f in self.abstractions.values())


def _strip_comment(line: str) -> str:
    # leave '#' inside string literals alone
    out, in_str, i = [], False, 0
    while i < len(line):
        ch = line[i]
        if ch == '"' and (i == 0 or line[i - 1] != "\\"):
            in_str = not in_str
        if ch == "#" and not in_str and (i == 0 or line[i - 1].isspace()):
            break
        out.append(ch)
        i += 1
    return "".join(out).rstrip()


def _logical_lines(text: str):
    cur, start = None, 0
    for n, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if line[0].isspace() and cur is not None:
            cur += " " + line.strip()
            continue
        if cur is not None:
            yield start, cur
        cur, start = line.strip(), n
    if cur is not None:
        yield start, cur


def _number(s: str, line: int) -> float:
    try:
        return float(s)
    except ValueError:
        raise SpecError(f"expected a number, got {s!r}", line) from None


def parse_spec(text: str) -> SpecConfig:
    cfg = SpecConfig()
    keys = []
    names = set()
    abs_lines = []

    def claim(name, line):
        if not re.fullmatch(IDENT, name):
            raise SpecError(f"bad attribute name {name!r}", line)
        if name in names:
            raise SpecError(f"attribute {name!r} declared twice", line)
        names.add(name)

    for line, decl in _logical_lines(text):
        word, _, rest = decl.partition(" ")
        rest = rest.strip()
        if word == "key":
            m = re.fullmatch(rf"({IDENT})\s*=\s*(\S+)\s*:\s*(\w+)", rest)
            if not m:
                raise SpecError("expected 'key <name> = <selector> : <type>'", line)
            name, sel, tag = m.groups()
            if tag not in TAGS:
                raise SpecError(f"unknown type {tag!r}", line)
            claim(name, line)
            try:
                cls, inst, fld = parse_selector(sel)
            except ValueError as exc:
                raise SpecError(str(exc), line) from None
            keys.append(KeyAttribute(name, cls, fld, tag, inst))
        elif word == "control":
            m = re.fullmatch(rf"({IDENT})\s*=\s*(\w+)", rest)
            if not m or m.group(2) not in CONTROL_LEVELS:
                raise SpecError("expected 'control <name> = package|class|method|thread'", line)
            claim(m.group(1), line)
            cfg.controls[m.group(1)] = m.group(2)
        elif word == "derive":
            m = re.fullmatch(rf"({IDENT})\s*=\s*(haversine|compass)\s*\((.*)\)", rest)
            if not m:
                raise SpecError("expected 'derive <name> = haversine(...)' or 'compass(...)'", line)
            name, fn, args = m.group(1), m.group(2), [a.strip() for a in m.group(3).split(",")]
            if len(args) not in (4, 5) or (fn == "haversine" and len(args) != 4):
                raise SpecError(f"{fn} takes (lat, lon, refLat, refLon{', epsilon' if fn == 'compass' else ''})",
                                line)
            claim(name, line)
            eps = _number(args[4], line) if len(args) == 5 else 1.0
            try:
                cfg.rules.append(DerivationRule(name, fn, args[0], args[1], _number(args[2], line),
                                                _number(args[3], line), eps))
            except ValueError as exc:
                raise SpecError(str(exc), line) from None
        elif word == "filter":
            if not rest or " " in rest:
                raise SpecError("expected 'filter <pattern>'", line)
            cfg.filters.append(rest)
        elif word == "abs":
            m = re.fullmatch(rf"({IDENT})\s*=\s*(.+)", rest)
            if not m:
                raise SpecError("expected 'abs <attr> = bool(...)|range[...]'", line)
            abs_lines.append((line, m.group(1), m.group(2)))
        elif word == "path":
            m = re.fullmatch(rf"({IDENT})\s+on\s+({IDENT})\s*=\s*(.+)", rest)
            if not m:
                raise SpecError("expected 'path <name> on <attr> = (f1) ~~> (f2) ~~> (f3)'", line)
            name, attr, body = m.groups()
            try:
                spec = PathSpec.from_property(parse_property(f"P[{body}]"), name)
            except (PropertySyntaxError, AbstractionError) as exc:
                raise SpecError(f"path {name}: {exc}", line) from None
            if spec.attr != attr:
                raise SpecError(f"path {name} is declared on {attr} but tests {spec.attr}", line)
            cfg.paths.append(PathDecl(name, spec))
        elif word == "prop":
            m = re.fullmatch(rf"({IDENT})\s*=\s*(.+)", rest)
            if not m:
                raise SpecError("expected 'prop <name> = <property>'", line)
            try:
                ast = parse_property(m.group(2))
            except PropertySyntaxError as exc:
                raise SpecError(f"prop {m.group(1)}: {exc}", line) from None
            cfg.props.append(PropDecl(m.group(1), m.group(2), ast))
        elif word == "attrs":
            items = [a.strip() for a in rest.split(",") if a.strip()]
            if not items:
                raise SpecError("expected 'attrs <name>, ...'", line)
            cfg.attrs = tuple(items)
        elif word == "buffer":
            if not rest.isdigit() or int(rest) < 1:
                raise SpecError("expected 'buffer <positive integer>'", line)
            cfg.buffer = int(rest)
        else:
            raise SpecError(f"unknown declaration {word!r}", line)

    try:
        cfg.keys = KeyAttributeSet(keys)
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    tags = cfg.tags()
    for r in cfg.rules:
        for inp in r.inputs:
            if inp not in tags:
                raise SpecError(f"derive {r.out}: unknown input attribute {inp!r}")
    for line, attr, text in abs_lines:
        if attr not in tags:
            raise SpecError(f"abs on unknown attribute {attr!r}", line)
        try:
            cfg.abstractions[attr] = parse_abstraction(attr, tags[attr], text)
        except (AbstractionError, PropertySyntaxError) as exc:
            raise SpecError(f"abs {attr}: {exc}", line) from None
    if cfg.attrs is not None:
        for a in cfg.attrs:
            if a not in tags:
                raise SpecError(f"attrs: unknown attribute {a!r}")
    for p in cfg.paths:
        if p.spec.attr not in tags:
            raise SpecError(f"path {p.name}: unknown attribute {p.spec.attr!r}")
    return cfg


def load_spec(path) -> SpecConfig:
    return parse_spec(Path(path).read_text(encoding="utf-8"))
