"""End-to-end acceptance checks, one test per criterion.

Properties are read from the generated scenario spec files.  Each test
records a PASS/FAIL line that is printed in the terminal summary.
"""

import dataclasses
import itertools
import json
import math
import random
import subprocess
import sys
import time

from fsmrv.abstraction import (apply_abstraction, build_asm, build_path_model, characteristic,
                               parse_abstraction)
from fsmrv.checker import (FALSE, INCOMPATIBLE, TRUE, TruthValue, check_asm, check_asm_bool, check_asm_multi,
                           check_dsm, check_lsm, check_path, decide_validity, eval_expr, path_nodes)
from fsmrv.config import parse_spec
from fsmrv.model import build_dsm, build_lsm, is_defined
from fsmrv.online import Session
from fsmrv.pipeline import check_spec, merge_verdicts, trace_writes
from fsmrv.propspec import F, G, ListOp, normalize, parse_property, pretty_print
from fsmrv.trace import KeyWrite, haversine


def _props(cfg):
    return {p.name: p.ast for p in cfg.props}


def _defined_states(m):
    return sum(1 for i in range(m.num_states()) if i != m.start and is_defined(m.vectors[i]))


# -- 1 --------------------------------------------------------------------------


def test_dining_models_agree(scenario, criterion):
    with criterion(1, "dining: LSM = writes+1, DSM <= 81, ASM <= 11, safety true on all three, < 1 s") as c:
        path, cfg, sc = scenario("dining", 1, 600)
        safety = _props(cfg)["safety"]
        t0 = time.perf_counter()
        attrs = cfg.state_attrs()
        writes = list(trace_writes(path, cfg))
        lsm = build_lsm(writes, attrs)
        dsm = build_dsm(writes, attrs)
        asm = build_asm(writes, attrs, cfg.abstraction_fns(attrs))
        verdicts = [check_lsm(lsm, safety), check_dsm(dsm, safety), check_asm(asm, safety)]
        elapsed = time.perf_counter() - t0
        assert len(writes) >= 600
        assert lsm.num_states() == len(writes) + 1
        assert dsm.num_states() <= 81
        assert _defined_states(asm) <= 11
        assert [v.value for v in verdicts] == [TRUE] * 3
        for kind in ("LSM", "DSM", "ASM"):
            assert [v.value for v in check_spec(kind, path, cfg)] == [TRUE]
        assert elapsed < 1.0
        c.note(f"{len(writes)} writes, DSM {dsm.num_states()}, ASM {_defined_states(asm)} defined "
               f"+ {asm.num_states() - 1 - _defined_states(asm)} initialization states, {elapsed:.2f} s")


# -- 2 --------------------------------------------------------------------------


def test_dining_bug_witnesses(scenario, criterion):
    with criterion(2, "dining bug: ASM false with adjacent E, LSM witness abstracts to it, online seq matches") as c:
        path, cfg, sc = scenario("dining", 1, 600, "adjacent_eating")
        safety = _props(cfg)["safety"]
        attrs = cfg.state_attrs()
        fns = cfg.abstraction_fns(attrs)
        writes = list(trace_writes(path, cfg))
        asm = build_asm(writes, attrs, fns)
        va = check_asm(asm, safety)
        assert va.value == FALSE
        eating = [k for k, av in enumerate(asm.vectors[va.witness.state]) if av.value]
        assert any((k + 1) % 5 in eating for k in eating)

        lsm = build_lsm(writes, attrs)
        vl = check_lsm(lsm, safety)
        assert vl.value == FALSE
        concrete = lsm.vector(vl.witness.state)
        abstracted = tuple(apply_abstraction(v, fns[a]) for a, v in zip(attrs, concrete))
        assert abstracted == asm.vectors[va.witness.state]
        assert va.witness.seq == vl.witness.seq

        s = Session(cfg)
        notes = []
        for line in sc.trace.splitlines():
            notes += s.ingest_line(line)
        violations = [n for n in notes if n["type"] == "violation"]
        assert violations and violations[0]["seq"] == vl.witness.seq
        c.note(f"first offending write seq {vl.witness.seq}")


# -- 3 --------------------------------------------------------------------------


def _with_abstractions(spec_text, abs_lines):
    kept = [ln for ln in spec_text.splitlines() if not ln.startswith("abs ")]
    return parse_spec("\n".join(kept + abs_lines) + "\n")


def test_readers_writers(scenario, criterion):
    with criterion(3, "readers-writers: safety via three boolean ASMs and one multi-valued ASM; priority") as c:
        path, cfg, sc = scenario("readers_writers", 1, 600, None, "priority")
        safety = _props(cfg)["safety"]
        parts = normalize(safety)
        assert len(parts) == 3
        configs = [
            ["abs r = bool(r > 0)", "abs w = bool(w == 0)"],
            ["abs r = bool(r > 0 || r == 0)"],
            ["abs w = bool(w == 0 || w == 1)"],
        ]
        for part, lines in zip(parts, configs):
            bcfg = _with_abstractions(sc.spec, lines)
            attrs = bcfg.projection(bcfg.abstractions)
            m = build_asm(trace_writes(path, bcfg, attrs), attrs, bcfg.abstraction_fns(attrs))
            assert check_asm_bool(m, part).value == TRUE, pretty_print(part)

        attrs = cfg.projection(("r", "w"))
        m = build_asm(trace_writes(path, cfg, attrs), attrs, cfg.abstraction_fns(attrs))
        assert check_asm_multi(m, safety).value == TRUE

        assert {v.name: v.value for v in check_spec("LSM", path, cfg)} == {"safety": TRUE, "priority": TRUE}
        bpath, bcfg, _ = scenario("readers_writers", 1, 600, "reader_barging", "priority")
        assert {v.name: v.value for v in check_spec("LSM", bpath, bcfg)} == {"safety": TRUE, "priority": FALSE}
        c.note(f"multi-valued ASM has {m.num_states()} states")


# -- 4 --------------------------------------------------------------------------


def test_oauth_path_model(scenario, criterion):
    with criterion(4, "oauth: 3 retained path nodes, skip_auth edge witness, agrees with LSM on 50 seeds"):
        path, cfg, _ = scenario("oauth", 1, 600)
        decl = cfg.paths[0]
        prop = decl.spec.to_property()
        m = build_path_model(trace_writes(path, cfg, (decl.spec.attr,)), decl.spec)
        assert len(path_nodes(m)) == 3
        assert check_path(m, prop).value == TRUE

        bpath, bcfg, _ = scenario("oauth", 1, 600, "skip_auth")
        bm = build_path_model(trace_writes(bpath, bcfg, (decl.spec.attr,)), decl.spec)
        vb = check_path(bm, prop)
        assert vb.value == FALSE and vb.witness.edge is not None
        a, b = vb.witness.edge
        assert path_nodes(bm)[a] == 1 and path_nodes(bm)[b] == 3

        rng = random.Random(4)
        outcomes = set()
        for _ in range(50):
            seed = rng.randrange(1, 2**32)
            bug = rng.choice([None, "skip_auth"])
            p, scfg, _ = scenario("oauth", seed, 200, bug)
            spec = scfg.paths[0].spec
            pv = check_path(build_path_model(trace_writes(p, scfg, (spec.attr,)), spec), prop).value
            lv = check_lsm(build_lsm(trace_writes(p, scfg), scfg.state_attrs()), _props(scfg)["authorized"]).value
            assert pv == lv, (seed, bug)
            outcomes.add(pv)
        assert outcomes == {TRUE, FALSE}


# -- 5 --------------------------------------------------------------------------


def _law_of_cosines(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return 6371000.0 * math.acos(max(-1.0, min(1.0, c)))


def test_drone(scenario, criterion):
    with criterion(5, "drone: altitude ASM <= 7 states, home true, geofence false on breach, haversine oracle") as c:
        path, cfg, _ = scenario("drone", 1, 3000)
        attrs = cfg.projection(("a",))
        m = build_asm(trace_writes(path, cfg, attrs), attrs, cfg.abstraction_fns(attrs))
        assert m.num_states() - 1 <= 7
        v = {x.name: x.value for x in check_spec("LSM", path, cfg)}
        assert v == {"home": TRUE, "return_home": TRUE, "geofence": TRUE}

        bpath, bcfg, _ = scenario("drone", 1, 3000, "geofence_breach")
        v = {x.name: x.value for x in check_spec("LSM", bpath, bcfg)}
        assert v == {"home": TRUE, "return_home": TRUE, "geofence": FALSE}

        rng = random.Random(5)
        worst = 0.0
        for _ in range(1000):
            pts = (rng.uniform(-89, 89), rng.uniform(-180, 180), rng.uniform(-89, 89), rng.uniform(-180, 180))
            worst = max(worst, abs(haversine(*pts) - _law_of_cosines(*pts)))
        assert worst < 0.1
        c.note(f"{m.num_states() - 1} altitude states, max oracle gap {worst:.2e} m")


# -- 6 --------------------------------------------------------------------------

OPS = ("==", "!=", "<", ">", "<=", ">=")


def _random_fn(rng, attr, tag):
    if tag == "str":
        return parse_abstraction(attr, tag, f'bool({attr} {rng.choice(["==", "!="])} "{rng.choice("ABC")}")')
    if rng.random() < 0.5:
        return parse_abstraction(attr, tag, f"bool({attr} {rng.choice(['==', '!=', '<', '>'])} {rng.randrange(6)})")
    cuts = sorted(rng.sample(range(6), rng.randint(1, 3)))
    return parse_abstraction(attr, tag, "range[" + ":".join(map(str, cuts)) + "]")


def _random_body(rng, tags, depth=0):
    if depth >= 2 or rng.random() < 0.4:
        a = rng.choice(list(tags))
        if tags[a] == "str":
            return f'{a} {rng.choice(["==", "!="])} "{rng.choice("ABC")}"'
        return f"{a} {rng.choice(OPS)} {rng.randrange(6)}"
    op = rng.choice(["&&", "||", "->", "!"])
    if op == "!":
        return f"!({_random_body(rng, tags, depth + 1)})"
    return f"({_random_body(rng, tags, depth + 1)}) {op} ({_random_body(rng, tags, depth + 1)})"


def _random_writes(rng, tags, n):
    domains = {a: (list("ABC") if t == "str" else rng.sample(range(6), rng.randint(2, 6))) for a, t in tags.items()}
    return [KeyWrite(seq, a, rng.choice(domains[a])) for seq, a in ((k, rng.choice(list(tags))) for k in range(1, n + 1))]


def test_oracle_equivalence(criterion):
    with criterion(6, "oracle suite: DSM = LSM, ASM true/false implies LSM, decide_validity vs enumeration") as c:
        rng = random.Random(6)
        tags = {"x": "int", "y": "int", "s": "str"}
        attrs = tuple(tags)
        tally = {"dsm": 0, "asm_decided": 0, "asm_incompatible": 0, "validity": 0}
        for _ in range(200):
            writes = _random_writes(rng, tags, rng.randint(1, 30))
            prop = parse_property(f"G[{_random_body(rng, tags)}]")
            lsm = build_lsm(writes, attrs)
            lv = check_lsm(lsm, prop).value
            assert check_dsm(build_dsm(writes, attrs), prop).value == lv, pretty_print(prop)
            tally["dsm"] += 1
            fns = {a: _random_fn(rng, a, t) for a, t in tags.items()}
            av = check_asm(build_asm(writes, attrs, fns), prop).value
            if av in (TRUE, FALSE):
                assert av == lv, pretty_print(prop)
                tally["asm_decided"] += 1
            else:
                assert av == INCOMPATIBLE
                tally["asm_incompatible"] += 1

        window = {"int": range(-3, 10), "str": ["A", "B", "C", "other"]}
        for _ in range(200):
            fns = {a: _random_fn(rng, a, t) for a, t in tags.items()}
            cons = {}
            for a, t in tags.items():
                seed_value = rng.choice(window[t][:-1] if t == "str" else range(0, 6))
                cons[a] = characteristic(fns[a], apply_abstraction(seed_value, fns[a]))
            body = parse_property(_random_body(rng, tags))
            seen = set()
            values = [[v for v in window[t] if cons[a].contains(v)] for a, t in tags.items()]
            for combo in itertools.product(*values):
                seen.add(eval_expr(body, dict(zip(attrs, combo))))
            expected = seen.pop() if len(seen) == 1 else TruthValue.U
            assert decide_validity(cons, body) == expected, pretty_print(body)
            tally["validity"] += 1
        assert tally["asm_decided"] > 50
        c.note(", ".join(f"{k} {v}" for k, v in tally.items()))


# -- 7 --------------------------------------------------------------------------


def _atom(rng):
    return f"{rng.choice('xy')} {rng.choice(OPS)} {rng.randrange(4)}"


def _equivalence_case(rng):
    letters = rng.sample("ABCDE", 4)
    st = [f's == "{x}"' for x in letters]
    form = rng.randrange(4)
    if form == 0:
        return f"G[({_atom(rng)}) && ({_atom(rng)}) && ({_atom(rng)})]"
    if form == 1:
        return f"G[({_atom(rng)}) -> (({_atom(rng)}) && ({_atom(rng)}))]"
    if form == 2:
        return f"P[({st[0]} || {st[1]}) ~~> {st[2]} ~~> {st[3]}]"
    return f"P[{st[0]} ~~> {st[1]} ~~> ({st[2]} || {st[3]})]"


def _lsm_over(values):
    attrs = ("x", "y", "s")
    return build_lsm([KeyWrite(k, a, v) for k, (a, v) in enumerate(values, 1)], attrs)


def test_equivalence_table(criterion):
    with criterion(7, "property equivalences: splits preserve verdicts on 100 pairs; two non-splits differ") as c:
        rng = random.Random(7)
        counts = {TRUE: 0, FALSE: 0}
        for _ in range(100):
            prop = parse_property(_equivalence_case(rng))
            parts = normalize(prop)
            assert len(parts) > 1
            values = [("x", 0), ("y", 0), ("s", "A")]
            for _ in range(rng.randint(1, 25)):
                a = rng.choice("xys")
                values.append((a, rng.choice("ABCDE") if a == "s" else rng.randrange(4)))
            m = _lsm_over(values)
            whole = check_lsm(m, prop).value
            split = merge_verdicts("p", [check_lsm(m, q) for q in parts]).value
            assert whole == split, pretty_print(prop)
            counts[whole] += 1
        assert counts[TRUE] and counts[FALSE]

        g_or = parse_property("G[x == 0 || x == 1]")
        assert normalize(g_or) == [g_or]
        m = _lsm_over([("x", 0), ("x", 1)])
        whole = check_lsm(m, g_or).value
        split = merge_verdicts("p", [check_lsm(m, parse_property(t)) for t in ("G[x == 0]", "G[x == 1]")]).value
        assert (whole, split) == (TRUE, FALSE)

        p_mid = parse_property('P[s == "A" ~~> (s == "B" || s == "C") ~~> s == "D"]')
        assert normalize(p_mid) == [p_mid]
        m = _lsm_over([("s", "A"), ("s", "B"), ("s", "D")])
        whole = check_lsm(m, p_mid).value
        split = merge_verdicts("p", [check_lsm(m, parse_property(f'P[s == "A" ~~> s == "{x}" ~~> s == "D"]'))
                                     for x in "BC"]).value
        assert (whole, split) == (TRUE, FALSE)
        c.note(f"{counts[TRUE]} true and {counts[FALSE]} false random cases")


# -- 8 --------------------------------------------------------------------------


def _walk(n):
    yield n
    if dataclasses.is_dataclass(n):
        for f in dataclasses.fields(n):
            v = getattr(n, f.name)
            for x in v if isinstance(v, tuple) else (v,):
                yield from _walk(x)


def test_elevator(scenario, criterion):
    with criterion(8, "elevator: properties a-c true on correct runs, skip_request violates only a"):
        path, cfg, _ = scenario("elevator", 1, 600)
        nodes = [n for p in cfg.props for n in _walk(p.ast)]
        assert any(isinstance(n, ListOp) for n in nodes)
        assert any(getattr(n, "primed", False) for n in nodes)
        assert any(isinstance(n, G) and any(isinstance(x, F) for x in _walk(n.body)) for n in nodes)
        for seed in (1, 2, 3):
            p, scfg, _ = scenario("elevator", seed, 600)
            assert {v.name: v.value for v in check_spec("LSM", p, scfg)} == {"a": TRUE, "b": TRUE, "c": TRUE}
            p, scfg, _ = scenario("elevator", seed, 600, "skip_request")
            assert {v.name: v.value for v in check_spec("LSM", p, scfg)} == {"a": FALSE, "b": TRUE, "c": TRUE}


# -- 9 --------------------------------------------------------------------------

_SCALE_CHILD = r"""
import json, resource, sys, time
from fsmrv.abstraction import build_asm
from fsmrv.checker import check_asm
from fsmrv.config import load_spec
from fsmrv.pipeline import trace_writes
t0 = time.perf_counter()
cfg = load_spec(sys.argv[2])
attrs = cfg.projection(cfg.abstractions)
m = build_asm(trace_writes(sys.argv[1], cfg, attrs), attrs, cfg.abstraction_fns(attrs))
stats = {}
v = check_asm(m, cfg.props[0].ast, stats=stats)
print(json.dumps({"seconds": time.perf_counter() - t0, "verdict": v.value, "states": m.num_states(),
                  "writes": m.total_transitions(), "checks": stats["validity_checks"],
                  "rss_mb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024}))
"""


def test_scale(tmp_path, criterion):
    from fsmrv.generators import ScenarioConfig, write_scenario

    with criterion(9, "scale: 175k-write drone trace, ASM + G check < 5 s and < 512 MB, checks = states <= 10") as c:
        write_scenario(ScenarioConfig("drone", 9, 175_000), tmp_path)
        spec = tmp_path / "scale.spec"
        lines = [ln for ln in (tmp_path / "scenario.spec").read_text().splitlines()
                 if not ln.startswith(("abs ", "prop "))]
        lines += ["abs a = bool(a > 325)", 'abs dir = bool(dir == "C")', 'prop home = G[a <= 325 -> dir == "C"]']
        spec.write_text("\n".join(lines) + "\n")
        out = subprocess.run([sys.executable, "-c", _SCALE_CHILD, str(tmp_path / "trace.jsonl"), str(spec)],
                             capture_output=True, text=True, check=True)
        r = json.loads(out.stdout)
        c.note(f"{r['writes']} transitions, {r['states']} states, {r['seconds']:.2f} s, {r['rss_mb']:.0f} MB")
        assert r["verdict"] == TRUE
        assert abs(r["writes"] - 175_000) <= 175_000 * 0.05
        assert r["checks"] == r["states"] <= 10
        assert r["rss_mb"] < 512
        assert r["seconds"] < 5.0


# -- 10 -------------------------------------------------------------------------

CORPUS = [
    'G[(p1 == "E" -> p2 != "E") && (p2 == "E" -> p3 != "E")]',
    "G[(r > 0 -> w == 0) && r >= 0 && (w == 0 || w == 1)]",
    "G[ww > 0 -> r' <= r]",
    "G[f in up -> F[f' == f]]",
    "G[all(i, up, i > 0 && i <= 8)]",
    "G[exists(i, 1:8, i == f)]",
    "G[up#size > 0 && d == \"up\" -> f < up#max]",
    'P[s == "Service_Requested" ~~> s == "Authorization_Granted" ~~> s == "Protected_Resource_Sent"]',
    "F[a <= 325 && dir == \"C\"]",
    "G[-x + 2 * (y - 3) / 4 > -1.5]",
    "G[!(x == 1) || !y]",
    "G[x in {1, 2, 3}]",
]

_BIN = {"->": (1, "right"), "||": (2, "left"), "&&": (3, "left"), "==": (5, "none"), "<": (5, "none"),
        ">=": (5, "none"), "+": (6, "left"), "-": (6, "left"), "*": (7, "left"), "/": (7, "left")}


def _random_tokens(rng, depth=0):
    """A flat, unparenthesized token list: boolean layer over relations over arithmetic."""

    def arith(n):
        toks = []
        for k in range(n):
            if k:
                toks.append(rng.choice("+-*/"))
            if rng.random() < 0.2:
                toks.append("-")
            toks.append(rng.choice(["a", "b", "c", str(rng.randrange(1, 9))]))
        return toks

    out = []
    for k in range(rng.randint(1, 4)):
        if k:
            out.append(rng.choice(["->", "||", "&&"]))
        if rng.random() < 0.3:
            out.append("!")
        out += arith(rng.randint(1, 3)) + [rng.choice(["==", "<", ">="])] + arith(rng.randint(1, 3))
    return out


def _parenthesize(tokens):
    """Independent precedence-climbing oracle that emits a fully parenthesized string."""
    pos = 0

    def primary():
        nonlocal pos
        t = tokens[pos]
        pos += 1
        if t == "!":
            return f"(!{operand(4)})"
        if t == "-":
            return f"(-{operand(8)})"
        return t

    def operand(min_prec):
        return climb(primary(), min_prec)

    def climb(lhs, min_prec):
        nonlocal pos
        while pos < len(tokens) and tokens[pos] in _BIN and _BIN[tokens[pos]][0] >= min_prec:
            op = tokens[pos]
            prec, assoc = _BIN[op]
            pos += 1
            rhs = primary()
            while pos < len(tokens) and tokens[pos] in _BIN:
                nprec = _BIN[tokens[pos]][0]
                if nprec > prec or (nprec == prec and _BIN[tokens[pos]][1] == "right"):
                    rhs = climb(rhs, nprec)
                else:
                    break
            lhs = f"({lhs} {op} {rhs})"
        return lhs

    return operand(0)


def test_parser(scenario, criterion):
    with criterion(10, "parser: round trip on the property corpus, 1000 random precedence cases") as c:
        texts = list(CORPUS)
        for name in ("dining", "readers_writers", "elevator", "oauth", "drone"):
            variant = "priority" if name == "readers_writers" else None
            _, cfg, _ = scenario(name, 1, 600, None, variant)
            texts += [pretty_print(p.ast) for p in cfg.props]
        for t in texts:
            ast = parse_property(t)
            printed = pretty_print(ast)
            assert parse_property(printed) == ast
            assert pretty_print(parse_property(printed)) == printed

        rng = random.Random(10)
        for _ in range(1000):
            toks = _random_tokens(rng)
            flat = " ".join(toks)
            assert parse_property(flat) == parse_property(_parenthesize(toks)), flat
        c.note(f"{len(texts)} corpus properties")
