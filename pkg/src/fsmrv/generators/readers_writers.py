"""Readers and writers sharing one database object.

``r`` counts active readers, ``w`` active writers and ``ww`` waiting writers.
With the ``priority`` variant a reader may not start while a writer waits.
"""

from __future__ import annotations

from .base import Emitter

CLS = "db.Database"
READERS, WRITERS = 3, 2
BUGS = ("rw_overlap", "reader_barging")
VARIANTS = ("priority",)

SAFETY = "G[(r > 0 -> w == 0) && r >= 0 && (w == 0 || w == 1)]"
PRIORITY = "G[ww > 0 -> r' <= r]"


def spec_text(variant=None) -> str:
    lines = [
        "# readers-writers: active readers r, active writers w, waiting writers ww",
        "filter db.*",
        f"key r = {CLS}:1.r : int",
        f"key w = {CLS}:1.w : int",
        f"key ww = {CLS}:1.ww : int",
        "abs r = range[0:1]",
        "abs w = range[0:1:2]",
        f"prop safety = {SAFETY}",
    ]
    if variant == "priority":
        lines.append(f"prop priority = {PRIORITY}")
    return "\n".join(lines) + "\n"


def generate(em: Emitter, events: int, bug, variant=None):
    rng = em.rng
    priority = variant == "priority"
    v = {"r": 0, "w": 0, "ww": 0}
    readers = ["idle"] * READERS
    writers = ["idle"] * WRITERS

    def put(thread, name, value):
        v[name] = value
        em.write(thread, CLS, name, value, instance=1)

    for name in ("r", "w", "ww"):
        put("main", name, 0)
    fired = bug is None
    while em.writes < events:
        late = em.writes >= events // 2
        if not fired and late:
            if bug == "rw_overlap" and v["r"] > 0 and v["w"] == 0 and "waiting" in writers:
                k = writers.index("waiting")
                put(f"writer-{k + 1}", "ww", v["ww"] - 1)
                put(f"writer-{k + 1}", "w", 1)
                writers[k] = "writing"
                fired = True
                continue
            if bug == "reader_barging" and v["ww"] > 0 and v["w"] == 0 and "idle" in readers:
                k = readers.index("idle")
                put(f"reader-{k + 1}", "r", v["r"] + 1)
                readers[k] = "reading"
                fired = True
                continue
        moves = []
        for k, s in enumerate(readers):
            if s == "idle" and v["w"] == 0 and not (priority and v["ww"] > 0):
                moves.append(("read", k))
            elif s == "reading":
                moves.append(("unread", k))
        for k, s in enumerate(writers):
            if s == "idle":
                moves.append(("want", k))
            elif s == "waiting" and v["r"] == 0 and v["w"] == 0:
                moves.append(("write", k))
            elif s == "writing":
                moves.append(("unwrite", k))
        act, k = rng.choice(moves)
        if act == "read":
            em.enter(f"reader-{k + 1}", f"{CLS}.startRead")
            put(f"reader-{k + 1}", "r", v["r"] + 1)
            readers[k] = "reading"
        elif act == "unread":
            put(f"reader-{k + 1}", "r", v["r"] - 1)
            readers[k] = "idle"
        elif act == "want":
            put(f"writer-{k + 1}", "ww", v["ww"] + 1)
            writers[k] = "waiting"
        elif act == "write":
            em.enter(f"writer-{k + 1}", f"{CLS}.startWrite")
            put(f"writer-{k + 1}", "ww", v["ww"] - 1)
            put(f"writer-{k + 1}", "w", 1)
            writers[k] = "writing"
        else:
            put(f"writer-{k + 1}", "w", 0)
            writers[k] = "idle"
