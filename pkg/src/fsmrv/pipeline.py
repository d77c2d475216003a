"""Trace file -> key writes -> model -> verdicts, driven by a spec config."""

from __future__ import annotations

import logging
from typing import Iterable, Iterator, Optional

from .abstraction import AbstractionError, PathSpec, build_asm, build_path_model
from .checker import (FALSE, INCOMPATIBLE, PENDING, TRUE, CheckError, Verdict, check, check_path)
from .config import SpecConfig
from .model import ASM, DSM, LSM, PATH, build_dsm, build_lsm
from .propspec import G, P, free_vars, has_primes, has_temporal, normalize, pretty_print
from .trace import KeyWrite, read_trace

log = logging.getLogger("fsmrv.pipeline")

MODEL_KINDS = {"lsm": LSM, "dsm": DSM, "asm": ASM, "path": PATH}


def trace_writes(path, cfg: SpecConfig, attrs: Optional[tuple] = None) -> Iterator[KeyWrite]:
    """Stream key writes from a trace file through filter, controls and derivations."""
    ing = cfg.ingestor(attrs)
    with open(path, "rb") as fh:
        yield from ing.run(read_trace(fh, cfg.inclusion_filter()))


def build_model(kind: str, writes: Iterable[KeyWrite], cfg: SpecConfig, attrs: Optional[tuple] = None,
                path: Optional[PathSpec] = None):
    attrs = tuple(attrs or cfg.state_attrs())
    if kind == LSM:
        return build_lsm(writes, attrs)
    if kind == DSM:
        return build_dsm(writes, attrs)
    if kind == ASM:
        return build_asm(writes, attrs, cfg.abstraction_fns(attrs))
    if kind == PATH:
        if path is None:
            if not cfg.paths:
                raise CheckError("the path model needs a 'path' declaration")
            path = cfg.paths[0].spec
        return build_path_model(writes, path)
    raise ValueError(f"unknown model kind {kind!r}")


def merge_verdicts(name: str, parts: list) -> Verdict:
    """Conjunction of the verdicts of a property's normalized parts."""
    for v in parts:
        if v.value == FALSE:
            return Verdict(FALSE, v.witness, _part_detail(v, parts), name)
    for v in parts:
        if v.value == INCOMPATIBLE:
            return Verdict(INCOMPATIBLE, v.witness, _part_detail(v, parts), name)
    for v in parts:
        if v.value == PENDING:
            return Verdict(PENDING, v.witness, _part_detail(v, parts), name)
    details = [v.detail for v in parts if v.detail]
    vacuous = all(v.detail == "vacuous" for v in parts)
    return Verdict(TRUE, None, "vacuous" if vacuous else "; ".join(details), name)


def _part_detail(v: Verdict, parts: list) -> str:
    if len(parts) == 1:
        return v.detail
    k = parts.index(v) + 1
    sub = v.witness.sub if v.witness else ""
    return f"conjunct {k}/{len(parts)}{' (' + sub + ')' if sub else ''}: {v.detail}"


def check_spec(kind: str, trace, cfg: SpecConfig, strict: bool = False, only: Optional[set] = None,
               attrs: Optional[tuple] = None, extra: Iterable = (), fallback: bool = True) -> list:
    """Check every ``prop`` (and, for path models, every ``path``) declaration.

    ``trace`` is a path or a list of key writes.  ``extra`` holds additional
    ``(name, ast)`` pairs, e.g. from ``--prop`` on the command line.  With
    ``fallback``, conjuncts the requested model cannot decide are checked on
    the linear model instead of raising :class:`CheckError`.
    """
    props = [(p.name, p.ast) for p in cfg.props] + list(extra)
    if only:
        props = [(n, a) for n, a in props if n in only]

    def writes():
        return trace_writes(trace, cfg, attrs) if not isinstance(trace, list) else iter(trace)

    out = []
    if kind == PATH:
        decls = [d for d in cfg.paths if not only or d.name in only]
        cache = {}
        def path_writes(spec):
            if isinstance(trace, list):
                return iter(trace)
            return trace_writes(trace, cfg, (spec.attr,))

        for d in decls:
            m = build_model(PATH, path_writes(d.spec), cfg, path=d.spec)
            out.append(merge_verdicts(d.name, [check_path(m, d.spec.to_property())]))
        for name, ast in props:
            parts = []
            for q in normalize(ast):
                if not isinstance(q, P):
                    raise CheckError(f"{name}: the path model checks only P[...] properties, "
                                     f"not {pretty_print(q)}")
                try:
                    spec = PathSpec.from_property(q, name)
                except AbstractionError as exc:
                    raise CheckError(f"{name}: {exc}") from None
                key = (spec.attr, spec.f1, spec.f2, spec.f3)
                if key not in cache:
                    cache[key] = build_model(PATH, path_writes(spec), cfg, path=spec)
                parts.append(check_path(cache[key], q))
            out.append(merge_verdicts(name, parts))
        return out
    if not props:
        return out
    ws = list(writes())
    lsm = []

    def on_lsm(q, why: str) -> Verdict:
        # parts the requested model cannot decide are checked on the linear model
        if not fallback:
            raise CheckError(why)
        if not lsm:
            lsm.append(build_model(LSM, ws, cfg, attrs))
        log.info("%s; checking on the linear model", why)
        v = check(lsm[0], q, strict)
        v.detail = f"{v.detail} (checked on the linear model: {why})" if v.detail else f"checked on the linear model: {why}"
        return v

    if kind != ASM:
        m = build_model(kind, ws, cfg, attrs)
        for name, ast in props:
            parts = []
            for q in normalize(ast):
                try:
                    parts.append(check(m, q, strict))
                except CheckError as exc:
                    if kind == LSM:
                        raise
                    parts.append(on_lsm(q, f"{name}: {exc}"))
            out.append(merge_verdicts(name, parts))
        return out
    # abstract checks run on the projection of the ASM onto each conjunct's attributes
    models = {}
    for name, ast in props:
        parts = []
        for q in normalize(ast):
            if not isinstance(q, G) or has_temporal(q.body) or has_primes(q.body):
                parts.append(on_lsm(q, f"{name}: abstract models decide only G[...] over current-state "
                                       f"expressions, not {pretty_print(q)}"))
                continue
            try:
                proj = cfg.projection(free_vars(q)) if attrs is None else tuple(a for a in attrs if a in free_vars(q))
            except ValueError as exc:
                raise CheckError(f"{name}: {exc}") from None
            if proj not in models:
                models[proj] = build_model(ASM, ws, cfg, proj or cfg.model_attrs(ASM))
            parts.append(check(models[proj], q, strict))
        out.append(merge_verdicts(name, parts))
    return out
