"""Print LSM / DSM / ASM state counts and check timings for every scenario.

    python3 scripts/state_counts.py [--events N] [--seed S]
"""

import argparse
import tempfile
import time
from pathlib import Path

from fsmrv.abstraction import build_path_model
from fsmrv.checker import path_nodes
from fsmrv.config import load_spec
from fsmrv.generators import ScenarioConfig, write_scenario
from fsmrv.model import build_dsm, build_lsm, is_defined
from fsmrv.pipeline import build_model, check_spec, trace_writes

# the abstract attributes reported for each scenario
ASM_ATTRS = {
    "dining": None,
    "readers_writers": ("r", "w"),
    "elevator": None,
    "oauth": None,
    "drone": ("a",),
}


def row(name, seed, events, root):
    out = root / name
    variant = "priority" if name == "readers_writers" else None
    write_scenario(ScenarioConfig(name, seed, events, None, variant), out)
    cfg = load_spec(out / "scenario.spec")
    trace = out / "trace.jsonl"
    t0 = time.perf_counter()
    writes = list(trace_writes(trace, cfg))
    t_ingest = time.perf_counter() - t0
    attrs = cfg.state_attrs()
    lsm = build_lsm(writes, attrs)
    dsm = build_dsm(writes, attrs)
    if cfg.paths:
        spec = cfg.paths[0].spec
        m = build_path_model(trace_writes(trace, cfg, (spec.attr,)), spec)
        asm = f"{len(path_nodes(m))} path"
    elif cfg.has_abstraction():
        sel = ASM_ATTRS[name] or cfg.model_attrs("ASM")
        m = build_model("ASM", trace_writes(trace, cfg, sel), cfg, sel)
        defined = sum(1 for i in range(m.num_states()) if i != m.start and is_defined(m.vectors[i]))
        asm = f"{defined} ({','.join(sel)})"
    else:
        asm = "-"
    timings = []
    for kind in ("LSM", "DSM"):
        t0 = time.perf_counter()
        verdicts = check_spec(kind, writes, cfg)
        timings.append(time.perf_counter() - t0)
    summary = " ".join(f"{v.name}={v.value}" for v in verdicts)
    return [name, len(writes), lsm.num_states(), dsm.num_states(), asm,
            f"{t_ingest * 1000:.0f}", f"{timings[0] * 1000:.0f}", f"{timings[1] * 1000:.0f}", summary]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    head = ["scenario", "writes", "LSM", "DSM", "ASM", "ingest ms", "LSM ms", "DSM ms", "verdicts"]
    with tempfile.TemporaryDirectory() as tmp:
        rows = [row(n, args.seed, args.events, Path(tmp)) for n in ASM_ATTRS]
    widths = [max(len(str(r[i])) for r in rows + [head]) for i in range(len(head))]
    for r in [head] + rows:
        print("  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip())


if __name__ == "__main__":
    main()
