"""Online monitoring: incremental model construction and per-state checking.

A :class:`Session` consumes events one at a time.  G properties are checked
once per newly created (abstract or distinct) state, or per new edge when the
body uses primed variables; P properties are checked on each retained state;
F properties resolve as soon as they are satisfied.

:class:`MonitorServer` exposes a session over TCP: clients send trace records,
one per line, and receive notification records on the same connection.
"""

from __future__ import annotations

import json
import logging
import queue
import socketserver
import threading
from dataclasses import dataclass, field
from typing import Optional

from .abstraction import UNKNOWN, PathBuilder, apply_abstraction
from .checker import (FALSE, INCOMPATIBLE, PENDING, TRUE, CheckError, Env, EvalError, Verdict, Witness,
                      _truth, _undefined_refs, _vec_text, compile_abstract, judge_abstract_state,
                      slot_of_state)
from .config import SpecConfig
from .export import to_json
from .model import GraphBuilder
from .pipeline import merge_verdicts
from .propspec import F, G, P, free_vars, has_primes, has_temporal, normalize, pretty_print
from .trace import UNDEF, KeyTypeError, TraceError, parse_event

log = logging.getLogger("fsmrv.online")


@dataclass
class _Part:
    """One normalized conjunct of a property and its running status."""

    prop: str
    node: object
    mode: str  # state | edge | path | eventually | offline
    status: str = PENDING
    witness: Optional[Witness] = None
    detail: str = ""
    decided: int = 0
    comp: object = None
    prev: Optional[tuple] = None  # (slot, seq) of the last retained state, for P

    def verdict(self, final: bool) -> Verdict:
        if self.status == FALSE:
            return Verdict(FALSE, self.witness, self.detail)
        if self.status == INCOMPATIBLE:
            return Verdict(INCOMPATIBLE, self.witness, self.detail)
        if self.mode in ("state", "edge") or (self.mode in ("path", "pathmodel") and final):
            return Verdict(TRUE, None, "vacuous" if self.decided == 0 else f"{self.decided} checks passed")
        if self.status == TRUE:
            return Verdict(TRUE, None, self.detail)
        if self.mode == "offline":
            return Verdict(PENDING, None, "nested temporal operators are decided offline")
        return Verdict(PENDING, None, "not yet satisfied" if self.mode == "eventually" else "stream not finished")


@dataclass
class Report:
    verdicts: list
    model: object
    validity_checks: int

    def to_record(self) -> dict:
        return {"type": "report", "verdicts": [v.to_record() for v in self.verdicts],
                "states": self.model.num_states(), "validityChecks": self.validity_checks}


class _Projection:
    """Incremental model over the attributes one group of G conjuncts refers to."""

    def __init__(self, attrs: tuple, fns: Optional[dict]):
        self.builder = GraphBuilder(attrs, fns)
        self.model = self.builder.model
        self.index = {a: i for i, a in enumerate(attrs)}
        self.parts = []


@dataclass
class Session:
    cfg: SpecConfig
    terminate_on_violation: bool = False
    strict: bool = False
    parts: list = field(default_factory=list)
    last_seq: int = 0
    validity_checks: int = 0
    terminated: bool = False

    def __post_init__(self):
        cfg = self.cfg
        self.attrs = cfg.state_attrs()
        extra = tuple(d.spec.attr for d in cfg.paths if d.spec.attr not in self.attrs)
        self.ingestor = cfg.ingestor(tuple(self.attrs) + extra)
        self.filter = cfg.inclusion_filter()
        self.abstract = cfg.has_abstraction()
        self.index = {a: i for i, a in enumerate(self.attrs)}
        self.concrete = [UNDEF] * len(self.attrs)
        main_attrs = cfg.model_attrs("ASM" if self.abstract else "DSM")
        self.projections = {(main_attrs, self.abstract): self._projection(main_attrs, self.abstract)}
        self.main = self.projections[(main_attrs, self.abstract)]
        self.model = self.main.model
        self.names = [p.name for p in cfg.props] + [d.name for d in cfg.paths]
        for p in cfg.props:
            for q in normalize(p.ast):
                self.parts.append(self._plan(p.name, q))
        self.paths = []
        for d in cfg.paths:
            part = _Part(d.name, d.spec.to_property(), "pathmodel")
            self.parts.append(part)
            self.paths.append((PathBuilder(d.spec), part))
        # start states are states like any other
        for proj in self.projections.values():
            self._new_state(proj, proj.model.start, None)
        for part in self.parts:
            if part.mode == "eventually" and not has_primes(part.node.body):
                if _truth(part.node.body, Env(self.index, tuple(self.concrete))) is True:
                    part.status = TRUE
                    part.detail = "satisfied at the start state"

    def _projection(self, attrs: tuple, abstract: bool) -> _Projection:
        fns = self.cfg.abstraction_fns(attrs) if abstract else None
        return _Projection(attrs, fns)

    def _plan(self, name: str, q) -> _Part:
        if isinstance(q, G) and not has_temporal(q.body):
            part = None
            if self.abstract:
                try:
                    part = _Part(name, q, "state", comp=compile_abstract(q.body))
                except CheckError as exc:
                    # primes or non-constant comparisons: check on concrete states instead
                    log.info("%s: %s; checking on concrete states", name, exc)
            if part is None:
                part = _Part(name, q, "edge" if has_primes(q.body) else "state")
            try:
                attrs = self.cfg.projection(free_vars(q.body)) or tuple(self.main.index)
            except ValueError as exc:
                raise CheckError(f"{name}: {exc}") from None
            key = (attrs, part.comp is not None)
            if key not in self.projections:
                self.projections[key] = self._projection(*key)
            self.projections[key].parts.append(part)
            return part
        if isinstance(q, P) and not any(has_temporal(s) for s in (q.f1, q.f2, q.f3)):
            return _Part(name, q, "path")
        if isinstance(q, F) and not has_temporal(q.body):
            return _Part(name, q, "eventually")
        if isinstance(q, (G, F, P)):
            return _Part(name, q, "offline")
        raise CheckError(f"{name}: top-level property must be G[...], F[...] or P[...]: {pretty_print(q)}")

    # -- ingestion
    def ingest_line(self, line, lineno: Optional[int] = None) -> list:
        text = line.decode("utf-8") if isinstance(line, bytes) else line
        if not text.strip():
            return []
        try:
            ev = parse_event(text, lineno)
        except TraceError as exc:
            return [{"type": "error", "message": str(exc)}]
        return self.ingest(ev)

    def ingest(self, ev) -> list:
        """Process one event; returns the notifications it caused, in order."""
        if self.terminated:
            return []
        if ev.seq <= self.last_seq:
            return [{"type": "error", "seq": ev.seq, "message": f"out-of-order seq {ev.seq} after {self.last_seq}"}]
        self.last_seq = ev.seq
        if not self.filter.matches(ev.qualified_name):
            return []
        try:
            writes = self.ingestor.feed(ev)
        except (KeyTypeError, ValueError) as exc:
            return [{"type": "error", "seq": ev.seq, "message": str(exc)}]
        out = []
        for w in writes:
            try:
                out += self._write(w)
            except (TypeError, ValueError, EvalError, CheckError) as exc:
                out.append({"type": "error", "seq": w.seq, "message": str(exc)})
            if self.terminated:
                break
        return out

    def _write(self, w) -> list:
        out = []
        for builder, part in self.paths:
            step = builder.add(w)
            if step is not None:
                out += self._path_edge(builder, part, step, w.seq)
        if w.name not in self.index:
            return out
        # validate the abstraction before touching any state
        for proj in self.projections.values():
            fns = proj.model.abstractions
            if fns and w.name in fns:
                apply_abstraction(w.value, fns[w.name])
        prev_concrete = tuple(self.concrete)
        self.concrete[self.index[w.name]] = w.value
        for proj in self.projections.values():
            step = proj.builder.add(w)
            if step is None:
                continue
            prev, cur, created, new_edge = step
            if created:
                out += self._new_state(proj, cur, w.seq)
            if new_edge and not self.terminated:
                out += self._new_edge(proj, prev, cur, w.seq)
            if self.terminated:
                return out
        out += self._concrete_step(prev_concrete, w.seq)
        return out

    def _notify(self, part: _Part, kind: str, seq, state: dict, detail: str, where: int = 0) -> list:
        if part.status == FALSE:
            return []
        if kind == "violation" or part.status != INCOMPATIBLE:
            part.status = FALSE if kind == "violation" else INCOMPATIBLE
            part.witness = Witness(where, seq, state, pretty_print(part.node))
            part.detail = detail
        out = [{"type": kind, "property": part.prop, "seq": seq, "state": state, "detail": detail}]
        if kind == "violation" and self.terminate_on_violation:
            self.terminated = True
            out.append({"type": "terminate", "property": part.prop, "seq": seq})
        return out

    @staticmethod
    def _state_text(proj: _Projection, i: int) -> dict:
        m = proj.model
        return _vec_text(m.attrs, m.vectors[i], m.abstractions)

    def _new_state(self, proj: _Projection, i: int, seq) -> list:
        out = []
        m = proj.model
        for part in proj.parts:
            if part.mode != "state" or part.status == FALSE:
                continue
            if part.comp is not None:
                self.validity_checks += 1
                j = judge_abstract_state(m, i, part.comp, self.strict)
                if j.outcome == "ok":
                    part.decided += 1
                elif j.outcome in ("violation", "incompatible"):
                    out += self._notify(part, j.outcome, seq, self._state_text(proj, i), j.detail, i)
            else:
                body = part.node.body
                r = _truth(body, Env(proj.index, m.vectors[i]))
                if r is True:
                    part.decided += 1
                elif r is False:
                    out += self._notify(part, "violation", seq, self._state_text(proj, i),
                                        f"violated at state {i}", i)
                elif self.strict and i != m.start and _undefined_refs(body, proj.index, m.vectors[i]):
                    out += self._notify(part, "violation", seq, self._state_text(proj, i),
                                        f"undefined attribute at state {i} (strict)", i)
            if self.terminated:
                break
        return out

    def _new_edge(self, proj: _Projection, a: int, b: int, seq) -> list:
        out = []
        m = proj.model
        for part in proj.parts:
            if part.mode != "edge" or part.status == FALSE:
                continue
            r = _truth(part.node.body, Env(proj.index, m.vectors[a], m.vectors[b]))
            if r is True:
                part.decided += 1
            elif r is False:
                out += self._notify(part, "violation", seq, self._state_text(proj, a),
                                    f"violated on transition {a} -> {b}", a)
            if self.terminated:
                break
        return out

    def _concrete_step(self, before: tuple, seq) -> list:
        out = []
        cur = tuple(self.concrete)
        for part in self.parts:
            if part.status in (FALSE, TRUE) or self.terminated:
                continue
            if part.mode == "eventually":
                body = part.node.body
                env = Env(self.index, before, cur) if has_primes(body) else Env(self.index, cur)
                if _truth(body, env) is True:
                    part.status = TRUE
                    part.detail = f"satisfied at seq {seq}"
            elif part.mode == "path":
                s = slot_of_state(part.node, Env(self.index, cur))
                if s is None:
                    continue
                if part.prev is not None and part.prev[0] == 1 and s == 3:
                    out += self._notify(part, "violation", seq, _vec_text(self.attrs, cur),
                                        f"f1 state at seq {part.prev[1]} followed directly by f3 state")
                part.prev = (s, seq)
                part.decided += 1
        return out

    def _path_edge(self, builder: PathBuilder, part: _Part, step: tuple, seq) -> list:
        prev, cur, _created, new_edge = step
        m = builder.model
        if not new_edge or part.status == FALSE:
            return []
        part.decided += 1
        a, b = m.vectors[prev][0], m.vectors[cur][0]
        if a is not UNKNOWN and a.slot == 1 and b.slot == 3:
            spec = builder.spec
            return self._notify(part, "violation", seq, {spec.attr: b.label},
                                f"transition {spec.label(1)} -> {spec.label(3)} skips {spec.label(2)}", cur)
        return []

    def status(self, final: bool = False) -> list:
        out = []
        for name in self.names:
            parts = [p.verdict(final) for p in self.parts if p.prop == name]
            out.append(merge_verdicts(name, parts))
        return out

    def finalize(self) -> Report:
        return Report(self.status(final=True), self.model, self.validity_checks)


# -- TCP server ------------------------------------------------------------------


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        srv: MonitorServer = self.server
        if not srv.busy.acquire(blocking=False):
            self._send({"type": "error", "message": "a monitoring session is already active"})
            return
        try:
            self._session(srv)
        finally:
            srv.busy.release()
            if srv.once:
                threading.Thread(target=srv.shutdown, daemon=True).start()

    def _send(self, rec: dict):
        try:
            self.wfile.write((json.dumps(rec, ensure_ascii=False) + "\n").encode("utf-8"))
            self.wfile.flush()
        except OSError:
            pass

    def _session(self, srv):
        try:
            session = Session(srv.cfg, srv.terminate_on_violation, srv.strict)
        except CheckError as exc:
            self._send({"type": "error", "message": str(exc)})
            return
        q = queue.Queue(maxsize=srv.cfg.buffer)
        stop = threading.Event()

        def reader():
            n = 0
            try:
                for line in self.rfile:
                    n += 1
                    while not stop.is_set():
                        try:
                            q.put((n, line), timeout=0.1)
                            break
                        except queue.Full:
                            continue
                    if stop.is_set():
                        break
            except OSError:
                pass
            finally:
                q.put(None)

        t = threading.Thread(target=reader, daemon=True)
        t.start()
        while True:
            item = q.get()
            if item is None:
                break
            for note in session.ingest_line(item[1], item[0]):
                log.info("notify %s", note)
                self._send(note)
            if session.terminated:
                stop.set()
                break
        report = session.finalize()
        srv.last_report = report
        if srv.dump_model:
            with open(srv.dump_model, "w", encoding="utf-8") as fh:
                fh.write(to_json(report.model))
        self._send(report.to_record())


class MonitorServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, cfg: SpecConfig, terminate_on_violation=False, strict=False,
                 dump_model: Optional[str] = None, once=False):
        self.cfg = cfg
        self.terminate_on_violation = terminate_on_violation
        self.strict = strict
        self.dump_model = dump_model
        self.once = once
        self.busy = threading.Lock()
        self.last_report = None
        super().__init__(addr, _Handler)


def parse_addr(text: str) -> tuple:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host, int(port)


def start_session(listen: str, cfg: SpecConfig, **kw) -> MonitorServer:
    """Bind a monitor server; call ``serve_forever`` (or run it in a thread)."""
    return MonitorServer(parse_addr(listen), cfg, **kw)
