"""A single elevator serving floor requests with a SCAN policy.

``f`` is the current floor, ``d`` the direction, ``up`` and ``down`` the
outstanding request lists.  The car moves one floor per write, serves a floor
by removing it from the lists, keeps its direction while requests remain ahead
and otherwise turns around in place.  Requests stop near the end of the run so
every request is served before the trace ends.
"""

from __future__ import annotations

from .base import Emitter

CLS = "elev.Elevator"
FLOORS = 8
BUGS = ("skip_request",)

PROP_A = "G[all(i, up, F[f == i])] && G[all(i, down, F[f == i])]"
PROP_B = ("G[up == up' && down == down' -> (d == \"down\" && d' == \"down\" -> f > f') && "
          "(d == \"up\" && d' == \"up\" -> f < f') && (d != d' -> f == f')]")
PROP_C = ("G[up == up' && down == down' -> (d == \"down\" && f <= up#min && f <= down#min -> d' == \"up\")] && "
          "G[up == up' && down == down' -> (d == \"up\" && f >= up#max && f >= down#max -> d' == \"down\")]")


def spec_text() -> str:
    lines = [
        "# elevator: floor f, direction d, outstanding requests up and down",
        "filter elev.*",
        f"key f = {CLS}:1.f : int",
        f"key d = {CLS}:1.d : str",
        f"key up = {CLS}:1.up : intList",
        f"key down = {CLS}:1.down : intList",
        f"prop a = {PROP_A}",
        f"prop b = {PROP_B}",
        f"prop c = {PROP_C}",
    ]
    return "\n".join(lines) + "\n"


def _step(s: dict):
    """Next elevator action as ``(attr, value)``, or None when idle."""
    f, d, up, down = s["f"], s["d"], s["up"], s["down"]
    if f in up:
        return "up", tuple(x for x in up if x != f)
    if f in down:
        return "down", tuple(x for x in down if x != f)
    reqs = up + down
    ahead = [x for x in reqs if (x > f if d == "up" else x < f)]
    if ahead:
        return "f", f + 1 if d == "up" else f - 1
    if reqs:
        return "d", "down" if d == "up" else "up"
    return None


def _drain_cost(s: dict) -> int:
    s = dict(s)
    n = 0
    while (act := _step(s)) is not None:
        s[act[0]] = act[1]
        n += 1
    return n


def generate(em: Emitter, events: int, bug):
    rng = em.rng
    s = {"f": 1, "d": "up", "up": (), "down": ()}

    def put(thread, name, value):
        s[name] = value
        em.write(thread, CLS, name, value, instance=1)

    for name in ("f", "d", "up", "down"):
        put("elevator", name, s[name])
    fired = bug is None
    banned = set()
    while em.writes + _drain_cost(s) + 2 < events:
        if not fired and em.writes >= events * 3 // 5:
            top = FLOORS
            if s["f"] < top - 1 and top not in s["up"] and top not in s["down"]:
                # the request for the top floor is lost before it is served
                put(f"caller-{top}", "up", tuple(sorted(s["up"] + (top,))))
                put("elevator", "up", tuple(x for x in s["up"] if x != top))
                banned.add(top)
                fired = True
                continue
        act = _step(s)
        if act is None or rng.random() < 0.3:
            floor = rng.randint(1, FLOORS)
            lst = rng.choice(("up", "down"))
            if floor == s["f"] or floor in s[lst] or floor in banned:
                continue
            em.enter(f"caller-{floor}", f"{CLS}.request")
            put(f"caller-{floor}", lst, tuple(sorted(s[lst] + (floor,))))
        else:
            put("elevator", *act)
    while (act := _step(s)) is not None:
        put("elevator", *act)
