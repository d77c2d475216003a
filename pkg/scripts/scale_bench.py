"""Time ingestion, ASM construction and a G check on a large drone trace.

    python3 scripts/scale_bench.py [--events 175000] [--repeat 3]
"""

import argparse
import resource
import tempfile
import time
from pathlib import Path

from fsmrv.abstraction import build_asm
from fsmrv.checker import check_asm
from fsmrv.config import parse_spec
from fsmrv.generators import ScenarioConfig, write_scenario
from fsmrv.pipeline import trace_writes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=175_000)
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        t0 = time.perf_counter()
        write_scenario(ScenarioConfig("drone", args.seed, args.events), tmp)
        print(f"generate  {time.perf_counter() - t0:6.2f} s")
        text = (Path(tmp) / "scenario.spec").read_text().splitlines()
        text = [ln for ln in text if not ln.startswith(("abs ", "prop "))]
        text += ["abs a = bool(a > 325)", 'abs dir = bool(dir == "C")', 'prop home = G[a <= 325 -> dir == "C"]']
        cfg = parse_spec("\n".join(text) + "\n")
        attrs = cfg.projection(cfg.abstractions)
        trace = Path(tmp) / "trace.jsonl"
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            writes = list(trace_writes(trace, cfg, attrs))
            t1 = time.perf_counter()
            m = build_asm(writes, attrs, cfg.abstraction_fns(attrs))
            t2 = time.perf_counter()
            stats = {}
            v = check_asm(m, cfg.props[0].ast, stats=stats)
            t3 = time.perf_counter()
            print(f"ingest {t1 - t0:5.2f} s  build {t2 - t1:5.2f} s  check {t3 - t2:5.3f} s  "
                  f"total {t3 - t0:5.2f} s  writes {len(writes)}  states {m.num_states()}  "
                  f"checks {stats['validity_checks']}  verdict {v.value}")
    print(f"peak rss  {resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024:.0f} MB")


if __name__ == "__main__":
    main()
