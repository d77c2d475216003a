"""Shared plumbing for the scenario simulators."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from ..trace import FIELD_WRITE, METHOD_ENTRY, METHOD_EXIT, Event

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 1
    events: int = 1000
    bug: Optional[str] = None
    variant: Optional[str] = None


@dataclass
class Scenario:
    trace: str  # newline-terminated JSON lines
    spec: str
    writes: int  # key-attribute field writes in the trace


class Emitter:
    """Accumulates trace records with consecutive sequence numbers.

    ``writes`` counts only field writes flagged as key writes; noise records
    (outside the scenario's inclusion filter) and bookkeeping writes do not count.
    """

    NOISE_CLASSES = ("util.Log", "java.util.concurrent.locks.ReentrantLock")

    def __init__(self, rng: random.Random, noise: float = 0.03):
        self.rng = rng
        self.noise_rate = noise
        self.seq = 0
        self.lines: list = []
        self.writes = 0

    def _emit(self, ev: Event):
        self.lines.append(ev.to_line())

    def _next(self) -> int:
        self.seq += 1
        return self.seq

    def write(self, thread: str, cls: str, fld: str, value, instance: Optional[int] = None, key: bool = True):
        self.maybe_noise(thread)
        self._emit(Event(self._next(), FIELD_WRITE, thread, cls=cls, instance=instance, field=fld, value=value))
        if key:
            self.writes += 1

    def enter(self, thread: str, method: str):
        self._emit(Event(self._next(), METHOD_ENTRY, thread, method=method))

    def exit(self, thread: str, method: str):
        self._emit(Event(self._next(), METHOD_EXIT, thread, method=method))

    def maybe_noise(self, thread: str):
        if self.rng.random() < self.noise_rate:
            cls = self.rng.choice(self.NOISE_CLASSES)
            if cls == "util.Log":
                self.enter(thread, "util.Log.info")
            else:
                self._emit(Event(self._next(), FIELD_WRITE, thread, cls=cls, instance=1, field="state",
                                 value=self.rng.randrange(2)))

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)
