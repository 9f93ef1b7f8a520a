"""World description (room, LEDs, user, link budget) and scenario files.

Scenario files are YAML. Angles are given in degrees and converted to radians
on load; everything else is SI. See README for the schema.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import yaml

from .blockage import DEFAULT_SEGMENTS, BodyModel, blockage_indicators
from .channel import AbgParams, LinkBudget, OpticalParams, gain_factors, gain_vector, incident_vectors, solve_abg
from .errors import ParseError, ValidationError
from .geometry import RotationAngles, rotation_matrix


@dataclass(frozen=True)
class Trajectory:
    """Straight walk from ``start`` to ``end`` (person centre, metres) sampled every ``step``."""

    start: tuple = (0.0, 0.0)
    end: tuple = (6.0, 6.0)
    step: float = 0.05
    points: tuple | None = None  # explicit (x, y, heading_rad) samples override the line

    def samples(self):
        if self.points is not None:
            return [(np.array([x, y]), float(h)) for x, y, h in self.points]
        a, b = np.asarray(self.start, float), np.asarray(self.end, float)
        length = float(np.linalg.norm(b - a))
        heading = float(np.arctan2(*(b - a)[::-1]))
        n = int(np.floor(length / self.step + 1e-9)) + 1
        return [(a + (b - a) * (k * self.step / length), heading) for k in range(n)]


@dataclass(frozen=True)
class Qos:
    rate_min: float = 5.0
    theta_max: float = np.deg2rad(30.0)


@dataclass(frozen=True)
class Scenario:
    room: tuple = (6.0, 6.0, 3.0)
    leds: np.ndarray = field(default_factory=lambda: np.array(
        [[x, y, 3.0] for y in (1.0, 3.0, 5.0) for x in (1.0, 3.0, 5.0)]))
    optics: OpticalParams = OpticalParams()
    link: LinkBudget = LinkBudget()
    segments: tuple = DEFAULT_SEGMENTS
    carry_forward: float = 0.30
    carry_height: float = 1.00
    position: tuple = (2.5, 2.0)  # person centre (x, y)
    heading: float = np.pi / 2  # walking direction, radians from +X
    pose: RotationAngles = RotationAngles()
    trajectory: Trajectory = Trajectory()
    qos: Qos = Qos()
    seed: int = 0
    name: str = "custom"
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "leds", np.atleast_2d(np.asarray(self.leds, dtype=float)))
        validate(self)

    @cached_property
    def abg(self) -> AbgParams:
        return solve_abg(self.link.amplitude, self.link.signal_power)

    def snapshot(self, position=None, heading=None, pose=None) -> "Snapshot":
        position = np.asarray(self.position if position is None else position, dtype=float)[:2]
        heading = self.heading if heading is None else heading
        pose = self.pose if pose is None else pose
        fwd = np.array([np.cos(heading), np.sin(heading), 0.0])
        body = BodyModel(center=np.array([position[0], position[1], 0.0]), forward=fwd,
                         segments=tuple(tuple(s) for s in self.segments))
        ue = body.center + self.carry_forward * fwd + np.array([0.0, 0.0, self.carry_height])
        R = rotation_matrix(pose)
        blocked = blockage_indicators(self.leds, ue, body).u
        return Snapshot(leds=self.leds, ue=ue, R=R, body=body, optics=self.optics, link=self.link,
                        abg=self.abg, blocked=blocked,
                        lam=gain_factors(self.leds, ue, self.optics, blocked),
                        d_vecs=incident_vectors(self.leds, ue, R))

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


@dataclass
class Snapshot:
    """One UE placement: everything the optimizers need, precomputed."""

    leds: np.ndarray
    ue: np.ndarray
    R: np.ndarray
    body: BodyModel
    optics: OpticalParams
    link: LinkBudget
    abg: AbgParams
    blocked: np.ndarray
    lam: np.ndarray
    d_vecs: np.ndarray

    def gains(self, n):
        return gain_vector(self.leds, self.ue, self.R, n, self.optics, self.blocked)


def validate(sc: Scenario):
    room = np.asarray(sc.room, dtype=float)
    if room.shape != (3,) or np.any(room <= 0):
        raise ValidationError("room", "all three dimensions must be positive")
    leds = sc.leds
    if leds.ndim != 2 or leds.shape[1] != 3 or len(leds) == 0:
        raise ValidationError("leds", "expected a nonempty list of [x, y, z] positions")
    if np.any(leds < 0) or np.any(leds > room):
        raise ValidationError("leds", "every LED must lie inside the room")
    if not 0 < sc.optics.half_angle < np.pi / 2:
        raise ValidationError("optics.half_angle_deg", "must lie in (0, 90)")
    if not 0 < sc.optics.fov <= np.pi / 2:
        raise ValidationError("optics.fov_deg", "must lie in (0, 90]")
    if sc.optics.pd_area <= 0:
        raise ValidationError("optics.pd_area_m2", "must be positive")
    lk = sc.link
    for name in ("bandwidth", "dc_bias", "amplitude"):
        if getattr(lk, name) <= 0:
            raise ValidationError(f"link.{name}", "must be positive")
    if not 0 < lk.signal_power <= lk.amplitude ** 2:
        raise ValidationError("link.eps", "must lie in (0, amplitude^2]")
    for w, l in sc.segments:
        if w <= 0 or l <= 0:
            raise ValidationError("body.segments", "diameters and heights must be positive")
    if len(sc.segments) != 3:
        raise ValidationError("body.segments", "expected three stacked cylinders")
    if sc.carry_height <= 0 or sc.carry_height >= room[2]:
        raise ValidationError("body.carry_height", "must lie strictly inside the room height")
    if not _inside_xy(sc.position, room):
        raise ValidationError("user.position", "must lie inside the room")
    traj = sc.trajectory
    pts = [p for p, _ in traj.samples()] if traj.points is not None else [traj.start, traj.end]
    if traj.points is None and traj.step <= 0:
        raise ValidationError("trajectory.step", "must be positive")
    if not all(_inside_xy(p, room) for p in pts):
        raise ValidationError("trajectory", "must lie inside the room")
    if sc.qos.rate_min <= 0:
        raise ValidationError("qos.rate_min", "must be positive")
    if not 0 <= sc.qos.theta_max <= np.pi / 2:
        raise ValidationError("qos.theta_max_deg", "must lie in [0, 90]")


def _inside_xy(p, room):
    p = np.asarray(p, dtype=float)
    return bool(0 <= p[0] <= room[0] and 0 <= p[1] <= room[1])


# ------------------------------------------------------------------ presets

def table2() -> Scenario:
    """Table II parameters with a 3x3 LED grid at {1,3,5}^2, 3 m high.

    The handset is held pitched by 30 degrees so that a flat PD does not face
    the ceiling and the orientation threshold matters.
    """
    return Scenario(name="table2", pose=RotationAngles.from_degrees(0.0, 30.0, 0.0))


def region_map_preset() -> Scenario:
    """Single ceiling LED at the room centre, user mid-room facing +Y.

    LED placement and user pose are our reading of the region-map figure.
    """
    return Scenario(name="region-map", leds=np.array([[3.0, 3.0, 3.0]]), position=(3.0, 3.0),
                    heading=np.pi / 2, pose=RotationAngles.from_degrees(0.0, 45.0, 0.0),
                    notes="LED position and user pose are a best reading of the source figure")


PRESETS = {"table2": table2, "region-map": region_map_preset}


# ------------------------------------------------------------------ file io

def _deg(v):
    return float(np.deg2rad(float(v)))


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a mapping")
    base = PRESETS[doc["preset"]]() if "preset" in doc else Scenario()
    kw = {}
    try:
        if "name" in doc:
            kw["name"] = str(doc["name"])
        if "room" in doc:
            kw["room"] = tuple(float(v) for v in doc["room"])
        if "leds" in doc:
            kw["leds"] = np.array(doc["leds"], dtype=float)
        if "optics" in doc:
            o = doc["optics"]
            kw["optics"] = OpticalParams(
                half_angle=_deg(o.get("half_angle_deg", np.rad2deg(base.optics.half_angle))),
                pd_area=float(o.get("pd_area_m2", base.optics.pd_area)),
                fov=_deg(o.get("fov_deg", np.rad2deg(base.optics.fov))))
        if "link" in doc:
            lk = doc["link"]
            kw["link"] = LinkBudget(
                bandwidth=float(lk.get("bandwidth_hz", base.link.bandwidth)),
                noise_dbm=float(lk.get("noise_dbm", base.link.noise_dbm)),
                dc_bias=float(lk.get("dc_bias_a", base.link.dc_bias)),
                amplitude=float(lk.get("amplitude", base.link.amplitude)),
                eps=None if lk.get("eps") is None else float(lk["eps"]))
        if "body" in doc and doc["body"] is not None:
            bd = doc["body"]
            if "segments" in bd:
                kw["segments"] = tuple((float(w), float(l)) for w, l in bd["segments"])
            if "carry_forward" in bd:
                kw["carry_forward"] = float(bd["carry_forward"])
            if "carry_height" in bd:
                kw["carry_height"] = float(bd["carry_height"])
        if "user" in doc:
            us = doc["user"]
            if "position" in us:
                kw["position"] = tuple(float(v) for v in us["position"][:2])
            if "heading_deg" in us:
                kw["heading"] = _deg(us["heading_deg"])
            if "pose_deg" in us:
                kw["pose"] = RotationAngles.from_degrees(*[float(v) for v in us["pose_deg"]])
        if "trajectory" in doc:
            tr = doc["trajectory"]
            if "points" in tr:
                pts = tuple((float(x), float(y), _deg(h)) for x, y, h in tr["points"])
                kw["trajectory"] = Trajectory(points=pts)
            else:
                kw["trajectory"] = Trajectory(
                    start=tuple(float(v) for v in tr.get("start", base.trajectory.start)),
                    end=tuple(float(v) for v in tr.get("end", base.trajectory.end)),
                    step=float(tr.get("step", base.trajectory.step)))
        if "qos" in doc:
            q = doc["qos"]
            kw["qos"] = Qos(rate_min=float(q.get("rate_min", base.qos.rate_min)),
                            theta_max=_deg(q.get("theta_max_deg", np.rad2deg(base.qos.theta_max))))
        if "seed" in doc:
            kw["seed"] = int(doc["seed"])
    except (TypeError, KeyError, AttributeError) as exc:
        raise ParseError(f"malformed scenario field: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"malformed scenario value: {exc}") from exc
    return base.with_(**kw)


def load_scenario(path) -> Scenario:
    """Load a YAML scenario file, or a built-in preset by name ('table2', 'region-map')."""
    path = str(path)
    if path in PRESETS and not os.path.exists(path):
        return PRESETS[path]()
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML in {path}: {exc}") from exc
    return scenario_from_dict(doc or {})
