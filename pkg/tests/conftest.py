import functools

import pytest

from fsmrv.config import parse_spec
from fsmrv.generators import ScenarioConfig, generate_trace
from fsmrv.pipeline import trace_writes


@pytest.fixture(scope="session")
def scenario(tmp_path_factory):
    """Generate (and cache) a scenario; returns (trace path, spec config, Scenario)."""
    root = tmp_path_factory.mktemp("scenarios")

    @functools.lru_cache(maxsize=None)
    def make(name, seed=1, events=600, bug=None, variant=None):
        sc = generate_trace(ScenarioConfig(name, seed, events, bug, variant))
        d = root / f"{name}-{seed}-{events}-{bug}-{variant}"
        d.mkdir(exist_ok=True)
        (d / "trace.jsonl").write_text(sc.trace)
        (d / "scenario.spec").write_text(sc.spec)
        return d / "trace.jsonl", parse_spec(sc.spec), sc

    return make


@pytest.fixture(scope="session")
def writes_of(scenario):
    @functools.lru_cache(maxsize=None)
    def get(name, seed=1, events=600, bug=None, variant=None, attrs=None):
        path, cfg, _ = scenario(name, seed, events, bug, variant)
        return tuple(trace_writes(path, cfg, attrs))

    return get


_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary."""
    results = request.config.stash.setdefault(_KEY, [])

    class _Rec:
        def __call__(self, number, title):
            self.entry = [number, title, "FAIL", ""]
            results.append(self.entry)
            return self

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc_type is None:
                self.entry[2] = "PASS"
            else:
                self.entry[3] = str(exc).splitlines()[0] if str(exc) else exc_type.__name__
            return False

        def note(self, text):
            self.entry[3] = text

    return _Rec()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_KEY, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, note in sorted(results):
        line = f"criterion {number:>2} {status}: {title}"
        terminalreporter.write_line(line + (f" ({note})" if note else ""))
