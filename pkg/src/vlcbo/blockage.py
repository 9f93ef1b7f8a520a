"""Self-blockage of the LOS links by the user's body.

The body is a stack of three vertical cylinders centred on the user. A link is
blocked when the LED lies behind the user (w.r.t. the walking direction) and the
LED-UE segment crosses the body's vertical plane through its centre inside the
cylinder union.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# (diameter, height) bottom to top: torso, neck, head
DEFAULT_SEGMENTS = ((0.40, 1.30), (0.12, 0.10), (0.20, 0.25))


@dataclass(frozen=True)
class BodyModel:
    center: np.ndarray
    forward: np.ndarray
    segments: tuple = DEFAULT_SEGMENTS

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).copy()
        c[2] = 0.0
        f = np.asarray(self.forward, dtype=float).copy()
        f[2] = 0.0
        nf = np.linalg.norm(f)
        if nf == 0:
            raise ValueError("body forward direction must have a horizontal component")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "forward", f / nf)
        for w, l in self.segments:
            if w <= 0 or l <= 0:
                raise ValueError("body segment diameters and heights must be positive")

    @property
    def height(self) -> float:
        return float(sum(l for _, l in self.segments))


@dataclass
class BlockageResult:
    u: np.ndarray  # 1 = blocked
    hit_points: list = field(default_factory=list)


def condition_one(n_u, led, ue) -> bool:
    """LED behind the user: ``n_u . (led - ue) <= 0``."""
    return bool(np.dot(n_u, np.asarray(led, float) - np.asarray(ue, float)) <= 0.0)


def plane_hit(led, ue, body: BodyModel):
    """Intersection of the open segment ue->led with the body's centre plane, or None."""
    led = np.asarray(led, dtype=float)
    ue = np.asarray(ue, dtype=float)
    direction = led - ue
    denom = float(body.forward @ direction)
    if denom == 0.0:
        return None
    t = float(body.forward @ (body.center - ue)) / denom
    if not 0.0 < t < 1.0:
        return None
    return ue + t * direction


def in_body(p, body: BodyModel) -> bool:
    p = np.asarray(p, dtype=float)
    r2 = (p[0] - body.center[0]) ** 2 + (p[1] - body.center[1]) ** 2
    z0 = 0.0
    for w, l in body.segments:
        if z0 <= p[2] <= z0 + l and r2 <= (w / 2) ** 2:
            return True
        z0 += l
    return False


def blockage_indicators(leds, ue, body: BodyModel) -> BlockageResult:
    """Blockage indicator per LED for a UE at ``ue`` carried by ``body``."""
    leds = np.atleast_2d(np.asarray(leds, dtype=float))
    u = np.zeros(len(leds), dtype=int)
    hits = []
    for i, led in enumerate(leds):
        hit = None
        if condition_one(body.forward, led, ue):
            x_b = plane_hit(led, ue, body)
            if x_b is not None and in_body(x_b, body):
                hit = x_b
                u[i] = 1
        hits.append(hit)
    return BlockageResult(u=u, hit_points=hits)


def sampled_blockage(leds, ue, body: BodyModel, n_samples: int = 10_000) -> np.ndarray:
    """Reference check: Condition I plus dense sampling of the segment against the full cylinders.

    This is stricter than the centre-plane rule and is only used for comparison.
    """
    leds = np.atleast_2d(np.asarray(leds, dtype=float))
    ue = np.asarray(ue, dtype=float)
    t = (np.arange(n_samples) + 0.5) / n_samples
    out = np.zeros(len(leds), dtype=int)
    for i, led in enumerate(leds):
        if not condition_one(body.forward, led, ue):
            continue
        pts = ue + t[:, None] * (led - ue)
        r2 = (pts[:, 0] - body.center[0]) ** 2 + (pts[:, 1] - body.center[1]) ** 2
        z0 = 0.0
        for w, l in body.segments:
            inside = (pts[:, 2] >= z0) & (pts[:, 2] <= z0 + l) & (r2 <= (w / 2) ** 2)
            if inside.any():
                out[i] = 1
                break
            z0 += l
    return out
