"""Command-line entry point: ``fsm-rv build|check|serve|export|gen``.

Verdict and model output go to stdout; diagnostics go to stderr.  Exit codes:
0 all properties true, 1 some property false, 2 some property incompatible
(and none false), 3 usage or parse error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .abstraction import AbstractionError
from .checker import FALSE, INCOMPATIBLE, PENDING, CheckError, EvalError
from .config import SpecConfig, SpecError, load_spec
from .export import RenderOptions, SchemaError, from_json, to_dot, to_json
from .generators import SCENARIOS, ScenarioConfig, write_scenario
from .model import ASM, PATH
from .pipeline import MODEL_KINDS, build_model, check_spec, trace_writes
from .propspec import PropertySyntaxError, parse_property
from .trace import KeyTypeError, TraceError

log = logging.getLogger("fsmrv")

EXIT_OK, EXIT_FALSE, EXIT_INCOMPATIBLE, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3, 4
LOG_LEVELS = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def exit_code(verdicts) -> int:
    values = {v.value for v in verdicts}
    if FALSE in values:
        return EXIT_FALSE
    if INCOMPATIBLE in values:
        return EXIT_INCOMPATIBLE
    return EXIT_OK


def _setup_logging():
    level = os.environ.get("FSMRV_LOG", "off").lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"FSMRV_LOG must be one of {', '.join(LOG_LEVELS)}")
    logging.basicConfig(stream=sys.stderr, level=LOG_LEVELS[level],
                        format="%(levelname)s %(name)s: %(message)s")


def _names(text):
    return tuple(a.strip() for a in text.split(",") if a.strip()) if text else None


def _load(args) -> SpecConfig:
    cfg = load_spec(args.spec)
    if getattr(args, "buffer", None):
        cfg.buffer = args.buffer
    return cfg


def _require_model(kind: str, cfg: SpecConfig, args):
    if kind == PATH and not cfg.paths:
        raise UsageError("--model path needs a 'path' declaration in the spec file")
    if kind == ASM and not cfg.has_abstraction():
        raise UsageError("--model asm needs at least one non-identity 'abs' declaration")
    attrs = _names(args.attrs)
    if attrs:
        try:
            cfg.projection(attrs)
        except ValueError as exc:
            raise UsageError(f"--attrs: {exc}") from None
    return attrs


def _extra_props(items) -> list:
    out = []
    for i, item in enumerate(items or (), 1):
        name, sep, text = item.partition("=")
        if not sep or not name.strip().isidentifier():
            name, text = f"prop{i}", item
        out.append((name.strip(), parse_property(text)))
    return out


def _write_out(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(m, fmt: str, args) -> str:
    if fmt == "json":
        return to_json(m) + "\n"
    hl = {}
    for item in getattr(args, "highlight", None) or ():
        key, sep, color = item.rpartition("=")
        if not sep or not key:
            raise UsageError(f"--highlight expects <state>=<color>, got {item!r}")
        hl[key] = color
    try:
        opts = RenderOptions(highlight=hl, label_mode="compact" if getattr(args, "compact", False) else "full")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return to_dot(m, opts)


# -- subcommands -------------------------------------------------------------------


def cmd_build(args) -> int:
    cfg = _load(args)
    kind = MODEL_KINDS[args.model]
    attrs = _require_model(kind, cfg, args)
    path = None
    if kind == PATH:
        decls = [d for d in cfg.paths if args.path in (None, d.name)]
        if not decls:
            raise UsageError(f"no path declaration named {args.path!r}")
        path = decls[0].spec
        writes = trace_writes(args.trace, cfg, (path.attr,))
    else:
        if attrs is None and kind == ASM:
            attrs = cfg.model_attrs(ASM)
        writes = trace_writes(args.trace, cfg, attrs)
    m = build_model(kind, writes, cfg, attrs, path)
    log.info("built %s with %d states", m.kind, m.num_states())
    _write_out(_render(m, args.format, args), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _load(args)
    kind = MODEL_KINDS[args.model]
    attrs = _require_model(kind, cfg, args)
    extra = _extra_props(args.prop)
    only = set(_names(args.only) or ())
    known = {p.name for p in cfg.props} | {d.name for d in cfg.paths} | {n for n, _ in extra}
    missing = only - known
    if missing:
        raise UsageError(f"--only: unknown properties {', '.join(sorted(missing))}")
    verdicts = check_spec(kind, args.trace, cfg, strict=args.strict_undefined, only=only or None,
                          attrs=attrs, extra=extra, fallback=not args.no_fallback)
    for v in verdicts:
        print(json.dumps(v.to_record(), ensure_ascii=False))
        if v.value == FALSE:
            log.warning("%s is violated: %s", v.name, v.detail)
    sys.stdout.flush()
    return exit_code(verdicts)


def cmd_serve(args) -> int:
    from .online import Session, start_session

    cfg = _load(args)
    Session(cfg)  # reject unsupported properties before binding
    try:
        srv = start_session(args.listen, cfg, terminate_on_violation=args.terminate_on_violation,
                            strict=args.strict_undefined, dump_model=args.dump_model, once=args.once)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    host, port = srv.server_address[:2]
    print(json.dumps({"type": "listening", "host": host, "port": port}), flush=True)
    try:
        srv.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        srv.server_close()
    report = srv.last_report
    if report is None:
        return EXIT_OK
    print(json.dumps(report.to_record(), ensure_ascii=False), flush=True)
    if any(v.value == PENDING for v in report.verdicts):
        log.info("some properties are still pending at the end of the stream")
    return exit_code(report.verdicts)


def cmd_export(args) -> int:
    text = Path(args.model_file).read_text(encoding="utf-8")
    m = from_json(text)
    _write_out(_render(m, args.format, args), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = ScenarioConfig(args.scenario, args.seed, args.events, args.bug, args.variant)
    try:
        sc = write_scenario(cfg, args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    log.info("wrote %d key writes to %s", sc.writes, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fsm-rv", description="State-model extraction and runtime verification.")
    sub = ap.add_subparsers(dest="command", required=True)

    def model_args(p, default="dsm"):
        p.add_argument("--spec", required=True, help="spec file")
        p.add_argument("--trace", required=True, help="trace file (JSON lines)")
        p.add_argument("--model", choices=sorted(MODEL_KINDS), default=default)
        p.add_argument("--attrs", help="comma-separated state attributes (default: all)")

    def render_args(p):
        p.add_argument("--format", choices=("dot", "json"), default="json")
        p.add_argument("--highlight", action="append", metavar="STATE=COLOR",
                       help="color a state (key text or s<id>) green, red or gray; repeatable")
        p.add_argument("--compact", action="store_true", help="values only in DOT labels")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("build", help="build a model and dump it")
    model_args(p)
    p.add_argument("--path", help="path declaration to use with --model path")
    render_args(p)
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("check", help="check the spec's properties on a trace")
    model_args(p, default="lsm")
    p.add_argument("--prop", action="append", metavar="[NAME=]PROPERTY", help="extra property; repeatable")
    p.add_argument("--only", help="comma-separated property names to check")
    p.add_argument("--strict-undefined", action="store_true",
                   help="an undefined attribute referenced by a G property is a violation")
    p.add_argument("--no-fallback", action="store_true",
                   help="reject properties the chosen model cannot decide instead of using the linear model")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("serve", help="monitor traces streamed over TCP")
    p.add_argument("--spec", required=True)
    p.add_argument("--listen", default="127.0.0.1:7070", help="host:port (port 0 picks a free port)")
    p.add_argument("--buffer", type=int, help="bounded event queue size")
    p.add_argument("--terminate-on-violation", action="store_true")
    p.add_argument("--strict-undefined", action="store_true")
    p.add_argument("--dump-model", help="write the final model (JSON) here after each session")
    p.add_argument("--once", action="store_true", help="exit after the first session")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("export", help="re-render a JSON model dump")
    p.add_argument("--model-file", required=True)
    render_args(p)
    p.set_defaults(format="dot", fn=cmd_export)

    p = sub.add_parser("gen", help="generate a scenario trace and spec file")
    p.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--events", type=int, default=1000, help="target number of key-attribute writes")
    p.add_argument("--bug", help="fault to inject")
    p.add_argument("--variant", help="scenario variant (readers_writers: priority)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_gen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        _setup_logging()
        return args.fn(args)
    except (UsageError, SpecError, PropertySyntaxError, TraceError, SchemaError, CheckError,
            AbstractionError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"fsm-rv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EvalError, KeyTypeError, OSError, TypeError, ValueError) as exc:
        print(f"fsm-rv: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
