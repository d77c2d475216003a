import pytest

from fsmrv.generators import SCENARIOS, ScenarioConfig, generate_trace, write_scenario
from fsmrv.model import is_defined
from fsmrv.pipeline import build_model, check_spec
from fsmrv.trace import read_trace

MATRIX = [
    ("dining", None, None, "safety"),
    ("dining", "adjacent_eating", None, "safety"),
    ("readers_writers", None, None, None),
    ("readers_writers", "rw_overlap", None, "safety"),
    ("readers_writers", None, "priority", None),
    ("readers_writers", "reader_barging", "priority", "priority"),
    ("elevator", None, None, None),
    ("elevator", "skip_request", None, "a"),
    ("oauth", None, None, None),
    ("oauth", "skip_auth", None, "authorized"),
    ("drone", None, None, None),
    ("drone", "geofence_breach", None, "geofence"),
]


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_deterministic_bytes(name):
    a = generate_trace(ScenarioConfig(name, 42, 500))
    b = generate_trace(ScenarioConfig(name, 42, 500))
    assert a.trace == b.trace and a.spec == b.spec
    assert generate_trace(ScenarioConfig(name, 43, 500)).trace != a.trace


@pytest.mark.parametrize("name", sorted(SCENARIOS))
@pytest.mark.parametrize("events", [300, 2000])
def test_event_count_within_five_percent(name, events):
    sc = generate_trace(ScenarioConfig(name, 3, events))
    assert abs(sc.writes - events) <= 0.05 * events


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_trace_is_well_formed_and_has_noise(name):
    sc = generate_trace(ScenarioConfig(name, 5, 400))
    events = list(read_trace(sc.trace.splitlines()))
    assert len(events) == len(sc.trace.splitlines())
    assert any(e.qualified_name.startswith("util.") or e.qualified_name.startswith("java.") for e in events)


@pytest.mark.parametrize("scenario, bug, variant, target", MATRIX)
def test_bug_violates_exactly_the_target(scenario, bug, variant, target, tmp_path):
    sc = write_scenario(ScenarioConfig(scenario, 11, 800, bug, variant), tmp_path)
    from fsmrv.config import parse_spec
    cfg = parse_spec(sc.spec)
    verdicts = check_spec("LSM", tmp_path / "trace.jsonl", cfg)
    failing = {v.name for v in verdicts if v.value == "false"}
    assert failing == ({target} if bug else set())
    assert all(v.value in ("true", "false") for v in verdicts)


def test_dining_state_bounds(scenario, writes_of):
    path, cfg, _ = scenario("dining", 1, 600)
    ws = writes_of("dining", 1, 600)
    dsm = build_model("DSM", ws, cfg)
    asm = build_model("ASM", ws, cfg)
    assert dsm.num_states() <= 81
    assert sum(is_defined(v) for v in asm.vectors) <= 11


@pytest.mark.parametrize("cfg, msg", [
    (ScenarioConfig("chess"), "unknown scenario"),
    (ScenarioConfig("dining", bug="nope"), "unknown bug"),
    (ScenarioConfig("elevator", variant="priority"), "unknown variant"),
    (ScenarioConfig("readers_writers", bug="reader_barging"), "priority"),
    (ScenarioConfig("dining", seed=-1), "seed"),
])
def test_invalid_configs(cfg, msg):
    with pytest.raises(ValueError, match=msg):
        generate_trace(cfg)
