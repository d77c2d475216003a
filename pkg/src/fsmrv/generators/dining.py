"""Five philosophers cycling T -> H -> E -> T around a table of five forks.

Philosopher ``j`` (0-based) uses forks ``j`` and ``j+1 mod 5`` and picks up the
lower-numbered one first, so the last philosopher reaches for its right fork
first.  A butler lets at most two philosophers sit (be hungry or eating) at a
time, which bounds the distinct state count.
"""

from __future__ import annotations

from .base import Emitter

N = 5
CLS = "phil.Philosopher"
BUGS = ("adjacent_eating",)

SAFETY = " && ".join(f'(p{i} == "E" -> p{i % N + 1} != "E")' for i in range(1, N + 1))


def spec_text() -> str:
    lines = ["# dining philosophers: state of each philosopher is T, H or E", "filter phil.*"]
    lines += [f"key p{i} = {CLS}:{i}.state : str" for i in range(1, N + 1)]
    lines += [f'abs p{i} = bool(p{i} == "E")' for i in range(1, N + 1)]
    lines.append(f"prop safety = G[{SAFETY}]")
    return "\n".join(lines) + "\n"


def _forks(j: int) -> tuple:
    a, b = j, (j + 1) % N
    return (min(a, b), max(a, b))


def generate(em: Emitter, events: int, bug):
    rng = em.rng
    state = ["T"] * N
    held = [[] for _ in range(N)]
    owner = [None] * N
    threads = [f"phil-{j + 1}" for j in range(N)]

    def set_state(j, s):
        state[j] = s
        em.write(threads[j], CLS, "state", s, instance=j + 1)

    def take(j, k):
        owner[k] = j
        held[j].append(k)
        em.write(threads[j], "phil.Fork", "holder", j + 1, instance=k + 1, key=False)

    def release(j):
        for k in held[j]:
            if owner[k] == j:
                owner[k] = None
                em.write(threads[j], "phil.Fork", "holder", 0, instance=k + 1, key=False)
        held[j].clear()

    for j in range(N):
        set_state(j, "T")
    fired = bug is None
    while em.writes < events:
        if not fired and em.writes >= events // 2 and state[1] == "E" and state[0] in ("T", "H"):
            # neighbor 1 grabs a plate while neighbor 2 is still eating
            if state[0] == "T":
                set_state(0, "H")
            set_state(0, "E")
            fired = True
            continue
        seated = sum(s != "T" for s in state)
        moves = []
        for j in range(N):
            if state[j] == "T" and seated < 2:
                moves.append(("hungry", j))
            elif state[j] == "H":
                need = [k for k in _forks(j) if k not in held[j]]
                if not need:
                    moves.append(("eat", j))
                elif owner[need[0]] is None:
                    moves.append(("fork", j))
            elif state[j] == "E":
                moves.append(("done", j))
        act, j = rng.choice(moves)
        if act == "hungry":
            em.enter(threads[j], f"{CLS}.hungry")
            set_state(j, "H")
        elif act == "fork":
            take(j, next(k for k in _forks(j) if k not in held[j]))
        elif act == "eat":
            em.enter(threads[j], f"{CLS}.eat")
            set_state(j, "E")
        else:
            release(j)
            set_state(j, "T")
