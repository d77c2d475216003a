"""Seeded scenario simulators that stand in for instrumented programs.

Each scenario produces a trace (JSON lines) and a companion spec file with its
key attributes, abstractions and property pack.  The same configuration always
produces the same bytes.
"""

from __future__ import annotations

import random
from pathlib import Path

from . import dining, drone, elevator, oauth, readers_writers
from .base import MAX_SEED, Emitter, Scenario, ScenarioConfig

SCENARIOS = {
    "dining": dining,
    "readers_writers": readers_writers,
    "elevator": elevator,
    "oauth": oauth,
    "drone": drone,
}

TRACE_FILE = "trace.jsonl"
SPEC_FILE = "scenario.spec"


def validate(cfg: ScenarioConfig):
    mod = SCENARIOS.get(cfg.scenario)
    if mod is None:
        raise ValueError(f"unknown scenario {cfg.scenario!r} (choose from {', '.join(SCENARIOS)})")
    if cfg.bug is not None and cfg.bug not in mod.BUGS:
        raise ValueError(f"unknown bug {cfg.bug!r} for {cfg.scenario} (choose from {', '.join(mod.BUGS)})")
    variants = getattr(mod, "VARIANTS", ())
    if cfg.variant is not None and cfg.variant not in variants:
        raise ValueError(f"unknown variant {cfg.variant!r} for {cfg.scenario}")
    if cfg.bug == "reader_barging" and cfg.variant != "priority":
        raise ValueError("bug 'reader_barging' needs the 'priority' variant")
    if not 0 <= cfg.seed <= MAX_SEED:
        raise ValueError("seed must be a 64-bit unsigned integer")
    if cfg.events < 20:
        raise ValueError("events must be at least 20")
    return mod


def generate_trace(cfg: ScenarioConfig) -> Scenario:
    mod = validate(cfg)
    # string seeding keeps streams independent across scenarios with the same seed
    em = Emitter(random.Random(f"{cfg.scenario}:{cfg.seed}:{cfg.bug}:{cfg.variant}"))
    if cfg.scenario == "readers_writers":
        mod.generate(em, cfg.events, cfg.bug, cfg.variant)
        spec = mod.spec_text(cfg.variant)
    else:
        mod.generate(em, cfg.events, cfg.bug)
        spec = mod.spec_text()
    return Scenario(em.text(), spec, em.writes)


def write_scenario(cfg: ScenarioConfig, out_dir) -> Scenario:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sc = generate_trace(cfg)
    (out / TRACE_FILE).write_text(sc.trace, encoding="utf-8")
    (out / SPEC_FILE).write_text(sc.spec, encoding="utf-8")
    return sc


__all__ = ["ScenarioConfig", "Scenario", "SCENARIOS", "generate_trace", "write_scenario", "validate"]
