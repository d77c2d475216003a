"""A quadcopter mission around its home point.

The vehicle waits on the ground, climbs vertically above home, flies out to a
circle of 200 m radius, laps it at two altitudes, descends, returns home and
lands.  Horizontal position jitters by well under a meter; altitude jitter
keeps each holding level inside its band.  Each simulation tick writes lat,
lon and alt.
"""

from __future__ import annotations

import math

from .base import Emitter

CLS = "sim.LatLonAlt"
HOME = (47.397742, 8.545594)
GROUND = 323.0
BUGS = ("geofence_breach",)
M_PER_DEG = 6371000.0 * math.pi / 180.0

ALT_CUTS = "324:362:365:385:386:410:411"


def spec_text() -> str:
    lat, lon = HOME
    lines = [
        "# drone: position, altitude, and derived direction and distance from home",
        "filter sim.*",
        f"key lat = {CLS}.lat : real",
        f"key lon = {CLS}.lon : real",
        f"key a = {CLS}.alt : real",
        f"derive dir = compass(lat, lon, {lat}, {lon}, 2.0)",
        f"derive d = haversine(lat, lon, {lat}, {lon})",
        f"abs a = range[{ALT_CUTS}]",
        'abs dir = bool(dir == "C")',
        'prop home = G[a <= 325 -> dir == "C"]',
        'prop return_home = G[(a > 325 && dir != "C") -> F[a <= 325 && dir == "C"]]',
        "prop geofence = G[d >= 0 && d <= 300]",
    ]
    return "\n".join(lines) + "\n"


def _lerp(a, b, u):
    return a + (b - a) * u


def _mission(radius: float, far: float):
    """Segments as (weight, fn(u) -> (north m, east m, alt m, alt jitter))."""

    def circle(r, bearing):
        t = math.radians(bearing)
        return r * math.cos(t), r * math.sin(t)

    return [
        (0.04, lambda u: (0.0, 0.0, GROUND, 0.4)),
        (0.08, lambda u: (0.0, 0.0, _lerp(GROUND, 363.5, u), 0.05)),
        (0.06, lambda u: (0.0, radius * u, 363.5, 0.5)),
        (0.08, lambda u: (*circle(radius, 90 + 90 * u), _lerp(363.5, 385.5, u), 0.05)),
        (0.16, lambda u: (*circle(radius, 180 + 360 * u), 385.5, 0.2)),
        (0.08, lambda u: (*circle(_lerp(radius, far, u), 540 + 90 * u), _lerp(385.5, 410.5, u), 0.05)),
        (0.16, lambda u: (*circle(far, 630 + 360 * u), 410.5, 0.2)),
        (0.08, lambda u: (*circle(_lerp(far, radius, u), 990 + 90 * u), _lerp(410.5, 363.0, u), 0.05)),
        (0.08, lambda u: (*(c * (1 - u) for c in circle(radius, 1080)), 363.0, 0.5)),
        (0.14, lambda u: (0.0, 0.0, _lerp(363.0, GROUND, min(1.0, 1.25 * u)), 0.05)),
    ]


def generate(em: Emitter, events: int, bug):
    rng = em.rng
    far = 320.0 if bug == "geofence_breach" else 200.0
    segs = _mission(200.0, far)
    ticks = max(len(segs) * 2, round(events / 3))
    total = sum(w for w, _ in segs)
    counts = [max(2, round(ticks * w / total)) for w, _ in segs]
    counts[-1] += ticks - sum(counts)
    first = True
    cos_home = math.cos(math.radians(HOME[0]))
    for (_w, fn), n in zip(segs, counts):
        for k in range(n):
            north, east, alt, aj = fn(k / (n - 1))
            north += rng.uniform(-0.5, 0.5)
            east += rng.uniform(-0.5, 0.5)
            alt += rng.uniform(-aj, aj)
            if first:
                alt, first = 0.0, False
            lat = round(HOME[0] + north / M_PER_DEG, 8)
            lon = round(HOME[1] + east / (M_PER_DEG * cos_home), 8)
            em.write("sim", CLS, "lat", lat, instance=1)
            em.write("sim", CLS, "lon", lon, instance=1)
            em.write("sim", CLS, "alt", round(alt, 3), instance=1)
