"""Sweeps behind the figures: region map, trajectory, thresholds, box widths, rate CDFs."""
from __future__ import annotations

import logging

import numpy as np

from .channel import incident_vectors, rate
from .errors import Infeasible, NoConvergence
from .fixed import QosSpec, alternating_optimize, max_rate_at_budget
from .geometry import RotationAngles
from .results import ResultTable
from .robust import RotationBox, robust_alternating_optimize, validate_robustness
from .scenario import Qos, Scenario

log = logging.getLogger(__name__)

REGIONS = ("NLOS-both", "Blocked", "LOS-OAR-only", "LOS-both")
MODES = ("fixed", "non_oar", "robust", "robust_non_oar")


def qos_for(sc: Scenario, qos: Qos | None = None) -> QosSpec:
    q = qos or sc.qos
    return QosSpec.build(q.rate_min, q.theta_max, sc.abg, sc.link)


def _meta(sc: Scenario, **extra):
    m = {"scenario": sc.name, "seed": sc.seed}
    if sc.notes:
        m["notes"] = sc.notes
    m.update(extra)
    return m


def _solve(snap, qs, mode, box, seed):
    if mode == "fixed":
        return alternating_optimize(snap, qs, seed=seed)
    if mode == "non_oar":
        return alternating_optimize(snap, qs, oar=False, seed=seed)
    if mode == "robust":
        return robust_alternating_optimize(snap, qs, box, seed=seed)
    if mode == "robust_non_oar":
        return robust_alternating_optimize(snap, qs, box, oar=False, seed=seed)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def solve_point(sc: Scenario, qs: QosSpec, mode="fixed", box: RotationBox | None = None, snap=None):
    """Run one optimisation; returns (result or None, status string)."""
    snap = snap or sc.snapshot()
    box = box or RotationBox()
    try:
        return _solve(snap, qs, mode, box, sc.seed), "ok"
    except Infeasible as exc:
        return None, f"infeasible: {exc}"
    except NoConvergence as exc:
        return None, f"no-convergence: {exc}"


# ------------------------------------------------------------------ region map

def classify_cell(sc: Scenario, position, heading, theta_max):
    """Best link class over all LEDs for a user standing at ``position``."""
    snap = sc.snapshot(position=position, heading=heading)
    d = incident_vectors(sc.leds, snap.ue, snap.R)
    below = sc.leds[:, 2] > snap.ue[2]
    phi = np.arccos(np.clip(d[:, 2] / np.linalg.norm(d, axis=1), -1, 1))
    fov = sc.optics.fov
    best = 0
    for i in range(len(sc.leds)):
        if not below[i]:
            continue
        if phi[i] <= fov:
            cls = 3
        elif phi[i] <= fov + theta_max:
            cls = 2
        else:
            continue
        if snap.blocked[i]:
            cls = 1
        best = max(best, cls)
    return best


def region_map(sc: Scenario, grid_step=0.25, theta_max=None, heading=None) -> ResultTable:
    theta_max = sc.qos.theta_max if theta_max is None else theta_max
    heading = sc.heading if heading is None else heading
    t = ResultTable(["x", "y", "region", "region_code"], {"x": "m", "y": "m"},
                    _meta(sc, theta_max_deg=float(np.rad2deg(theta_max)), grid_step=grid_step,
                          heading_deg=float(np.rad2deg(heading))))
    W, L, _ = sc.room
    xs = np.arange(grid_step / 2, W, grid_step)
    ys = np.arange(grid_step / 2, L, grid_step)
    for y in ys:
        for x in xs:
            c = classify_cell(sc, (x, y), heading, theta_max)
            t.add(x=float(x), y=float(y), region=REGIONS[c], region_code=c)
    return t


# ------------------------------------------------------------------ trajectory

TRAJ_COLUMNS = ["x", "y", "ue_x", "ue_y", "blocked", "n_blocked", "rate", "power", "qos_power",
                "iterations", "converged", "status"]
TRAJ_UNITS = {"x": "m", "y": "m", "ue_x": "m", "ue_y": "m", "rate": "bit/s/Hz", "power": "W",
              "qos_power": "W"}


def sweep_trajectory(sc: Scenario, qos: Qos | None = None, mode="fixed", budget=0.1,
                     box: RotationBox | None = None) -> ResultTable:
    """Walk the trajectory.

    ``rate`` is the best rate reachable with transmit power ``budget``; robust
    mode has no budget notion and reports the nominal rate of its solution.
    ``qos_power`` is the least power meeting the rate target (NaN if infeasible).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    qs = qos_for(sc, qos)
    t = ResultTable(list(TRAJ_COLUMNS), dict(TRAJ_UNITS),
                    _meta(sc, mode=mode, budget_w=budget, rate_min=qs.rate_min,
                          theta_max_deg=float(np.rad2deg(qs.theta_max))))
    box = box or RotationBox()
    for pos, heading in sc.trajectory.samples():
        snap = sc.snapshot(position=pos, heading=heading)
        res, status = solve_point(sc, qs, mode, box, snap)
        qos_power = res.power if res is not None else float("nan")
        if mode in ("fixed", "non_oar"):
            br = max_rate_at_budget(snap, qs.theta_max, budget, oar=(mode == "fixed"))
            r, pw, it, conv = br.rate, br.power, br.iterations, br.converged
            if res is not None:
                it, conv = res.iterations, res.converged
        elif res is not None:
            r, pw, it, conv = res.rate, res.power, res.iterations, res.converged
        else:
            r, pw, it, conv = float("nan"), float("nan"), 0, False
        t.add(x=float(pos[0]), y=float(pos[1]), ue_x=float(snap.ue[0]), ue_y=float(snap.ue[1]),
              blocked="".join(str(int(b)) for b in snap.blocked), n_blocked=int(snap.blocked.sum()),
              rate=float(r), power=float(pw), qos_power=float(qos_power), iterations=int(it),
              converged=bool(conv), status=status)
    return t


# ------------------------------------------------------------------ thresholds

def sweep_thresholds(sc: Scenario, rate_grid, theta_grid_deg, modes=("fixed", "non_oar"),
                     box: RotationBox | None = None) -> ResultTable:
    t = ResultTable(["mode", "rate_min", "theta_max_deg", "power", "rate", "iterations", "converged",
                     "nonmonotone", "status"],
                    {"rate_min": "bit/s/Hz", "theta_max_deg": "deg", "power": "W", "rate": "bit/s/Hz"},
                    _meta(sc))
    snap = sc.snapshot()
    for mode in modes:
        for rmin in rate_grid:
            for th in theta_grid_deg:
                qs = QosSpec.build(rmin, np.deg2rad(th), sc.abg, sc.link)
                res, status = solve_point(sc, qs, mode, box, snap)
                nan = float("nan")
                t.add(mode=mode, rate_min=float(rmin), theta_max_deg=float(th),
                      power=res.power if res else nan, rate=res.rate if res else nan,
                      iterations=res.iterations if res else 0, converged=bool(res and res.converged),
                      nonmonotone=bool(res and res.nonmonotone), status=status)
    return t


def sweep_box(sc: Scenario, widths_deg, qos: Qos | None = None,
              modes=("robust", "robust_non_oar", "fixed", "non_oar")) -> ResultTable:
    """Power versus rotation-box half-width, same half-width on every axis."""
    qs = qos_for(sc, qos)
    t = ResultTable(["mode", "half_width_deg", "power", "iterations", "converged", "status"],
                    {"half_width_deg": "deg", "power": "W"},
                    _meta(sc, rate_min=qs.rate_min, theta_max_deg=float(np.rad2deg(qs.theta_max))))
    snap = sc.snapshot()
    for mode in modes:
        for w in widths_deg:
            res, status = solve_point(sc, qs, mode, RotationBox.from_degrees(w, w, w), snap)
            t.add(mode=mode, half_width_deg=float(w), power=res.power if res else float("nan"),
                  iterations=res.iterations if res else 0, converged=bool(res and res.converged),
                  status=status)
    return t


def convergence_history(sc: Scenario, theta_grid_deg, qos: Qos | None = None) -> ResultTable:
    q = qos or sc.qos
    t = ResultTable(["theta_max_deg", "iteration", "power"], {"theta_max_deg": "deg", "power": "W"},
                    _meta(sc, rate_min=q.rate_min))
    snap = sc.snapshot()
    for th in theta_grid_deg:
        qs = QosSpec.build(q.rate_min, np.deg2rad(th), sc.abg, sc.link)
        res = alternating_optimize(snap, qs, seed=sc.seed)
        for k, pw in enumerate(res.power_history, start=1):
            t.add(theta_max_deg=float(th), iteration=k, power=float(pw))
    return t


# ------------------------------------------------------------------ rate CDF

SCHEMES = {"robust_oar": "robust", "robust_non_oar": "robust_non_oar",
           "nominal_oar": "fixed", "nominal_non_oar": "non_oar"}


def monte_carlo_cdf(sc: Scenario, box: RotationBox, qos: Qos | None = None, schemes=tuple(SCHEMES),
                    n=10_000, seed=None) -> ResultTable:
    qs = qos_for(sc, qos)
    seed = sc.seed if seed is None else seed
    snap = sc.snapshot()
    t = ResultTable(["scheme", "k", "rate", "cdf", "violation_rate", "power"],
                    {"rate": "bit/s/Hz", "power": "W"},
                    _meta(sc, seed=seed, n_mc=n, rate_min=qs.rate_min,
                          box_deg=" ".join("%.17g" % v for v in np.rad2deg(box.as_array()))))
    for name in schemes:
        res, status = solve_point(sc, qs, SCHEMES[name], box, snap)
        if res is None:
            log.warning("%s: %s", name, status)
            continue
        rep = validate_robustness(res.p, res.n, snap, box, qs.rate_min, n, seed)
        for k, (r, c) in enumerate(zip(rep.rates, rep.cdf)):
            t.add(scheme=name, k=k, rate=float(r), cdf=float(c), violation_rate=rep.violation_rate,
                  power=res.power)
    return t
