"""Robust design for a UE whose orientation wobbles inside a known rotation box.

Channel gains are bounded by a grid search over the box, the bounds are
wrapped in a ball, and the rate constraint is enforced for every gain vector in
that ball through an S-procedure LMI.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .channel import LinkBudget, fov_indicator, rate, rates
from .config import DEFAULT, Tolerances
from .errors import EmptyLedSet, Infeasible, NoConvergence
from .fixed import (AoResult, Beamformer, QosSpec, cone_argmax, initial_orientations, orientation_step,
                    solve_beamforming, step2_screen)
from .geometry import E3, rotation_matrices
from .scenario import Snapshot

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RotationBox:
    """Half-widths (radians) of the yaw, pitch and roll errors."""

    bar_alpha: float = 0.0
    bar_beta: float = 0.0
    bar_gamma: float = 0.0

    def __post_init__(self):
        v = self.as_array()
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("rotation box half-widths must be finite and nonnegative")

    @classmethod
    def from_degrees(cls, a=0.0, b=0.0, g=0.0):
        return cls(*np.deg2rad([a, b, g]))

    def as_array(self):
        return np.array([self.bar_alpha, self.bar_beta, self.bar_gamma], dtype=float)

    @property
    def is_zero(self):
        return not np.any(self.as_array())

    def grid(self, n):
        axes = [np.linspace(-h, h, n) if h > 0 else np.zeros(1) for h in self.as_array()]
        return np.array(list(itertools.product(*axes)))

    def sample(self, rng, size=None):
        h = self.as_array()
        return rng.uniform(-h, h, size=None if size is None else (size, 3))


@dataclass
class RobustChannel:
    g_hat: np.ndarray
    g_lo: np.ndarray
    g_hi: np.ndarray
    g_nom: np.ndarray
    q_lo: np.ndarray  # (N, 3) lambda_i R_-^T d_i, minimiser over the grid
    q_hi: np.ndarray
    dev: np.ndarray
    C: np.ndarray | None = None
    upsilon: float | None = None

    def worst_amplitude(self, p):
        """min over the ball of (g_hat + dg).p."""
        p = np.asarray(p, dtype=float)
        ups = self.upsilon if self.upsilon is not None else float(self.dev @ self.dev)
        return float(self.g_hat @ p - np.sqrt(ups) * np.linalg.norm(p))


def perturbed_incidence(d_vecs, angles):
    """Incidence vectors R_d^T d for every rotation error in ``angles``: shape (K, N, 3)."""
    Rd = rotation_matrices(angles)
    return np.einsum("nj,kji->kni", d_vecs, Rd)


def perturbed_gains(snap: Snapshot, n, angles):
    d = perturbed_incidence(snap.d_vecs, angles)
    raw = snap.lam[None, :] * (d @ n)
    gate = np.stack([fov_indicator(dk, n, snap.optics.fov) for dk in d])
    return np.maximum(raw * gate, 0.0)


def channel_bounds(snap: Snapshot, n, box: RotationBox, grid_n=DEFAULT.bound_grid,
                   margin=DEFAULT.bound_margin) -> RobustChannel:
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1) > 1e-9:
        raise ValueError("orientation must be a unit vector")
    g_nom = snap.gains(n).g
    grid = box.grid(grid_n)
    d = perturbed_incidence(snap.d_vecs, grid)
    raw = snap.lam[None, :] * (d @ n)  # (K, N), ungated
    i_lo, i_hi = raw.argmin(axis=0), raw.argmax(axis=0)
    cols = np.arange(len(n_led := snap.lam))
    lo, hi = raw[i_lo, cols], raw[i_hi, cols]
    q_lo = snap.lam[:, None] * d[i_lo, cols]
    q_hi = snap.lam[:, None] * d[i_hi, cols]
    # The rotation error tilts every incidence direction by at most the sum of the half-widths.
    spread = float(box.as_array().sum())
    cos_nom = np.clip((snap.d_vecs @ n) / np.linalg.norm(snap.d_vecs, axis=1), -1, 1)
    phi = np.arccos(cos_nom)
    fov = snap.optics.fov
    inside = phi + spread <= fov
    outside = phi - spread > fov
    partial = ~inside & ~outside
    g_lo = np.where(inside, lo, 0.0)
    g_hi = np.where(outside, 0.0, np.maximum(hi, 0.0))
    g_lo = np.maximum(g_lo, 0.0)
    span = g_hi - g_lo
    g_lo = np.maximum(g_lo - margin * span, 0.0)
    g_hi = g_hi + margin * span
    if box.is_zero:
        g_lo = g_hi = g_nom.copy()
    g_lo = np.minimum(g_lo, g_nom)
    g_hi = np.maximum(g_hi, g_nom)
    del partial, n_led
    rc = RobustChannel(g_hat=0.5 * (g_lo + g_hi), g_lo=g_lo, g_hi=g_hi, g_nom=g_nom,
                       q_lo=q_lo, q_hi=q_hi, dev=0.5 * (g_hi - g_lo))
    build_ellipsoid(rc)
    return rc


def build_ellipsoid(rc: RobustChannel):
    """Ball circumscribing the deviation box: C = I, upsilon = sum dev^2."""
    rc.C = np.eye(len(rc.dev))
    rc.upsilon = float(rc.dev @ rc.dev)
    return rc.C, rc.upsilon


# ------------------------------------------------------------------ beamforming

def solve_robust_beamforming(rc: RobustChannel, qos: QosSpec, link: LinkBudget, tol: Tolerances = DEFAULT,
                             seed=0) -> Beamformer:
    if rc.upsilon is None:
        build_ellipsoid(rc)
    if rc.upsilon == 0.0:
        return solve_beamforming(rc.g_hat, qos, link, tol, seed)
    if not np.any(rc.g_hat > 0):
        raise Infeasible("nominal channel estimate is zero")
    N = len(rc.g_hat)
    # LEDs with no nominal gain and no spread can only cost power
    act = (rc.g_hat > 0) | (rc.dev > 0)
    # Same rescaling as the nominal solve: Q = s P with s = |g_hat / c2|^2.
    gg = rc.g_hat[act] / qos.c2
    s = float(gg @ gg)
    u = gg / np.sqrt(s)
    ups = rc.upsilon / qos.c1
    cap = link.amplitude_cap
    n = len(u)
    C = rc.C[np.ix_(act, act)]
    prob = sdp.SdpProblem([n, n + 1, 1])
    prob.set_cost(0, np.eye(n))

    def unit(i, j, size):
        E = np.zeros((size, size))
        E[i, j] += 0.5
        E[j, i] += 0.5
        return E

    # slack block Z equals [[Q + eta C, Q u], [u^T Q, u^T Q u - 1 - eta ups / s]]
    for i in range(n):
        for j in range(i, n):
            prob.add_constraint({1: unit(i, j, n + 1), 0: -unit(i, j, n), 2: [[-C[i, j]]]}, "=", 0.0)
        B = 0.5 * (np.outer(np.eye(n)[i], u) + np.outer(u, np.eye(n)[i]))
        prob.add_constraint({1: unit(i, n, n + 1), 0: -B}, "=", 0.0)
    prob.add_constraint({1: unit(n, n, n + 1), 0: -np.outer(u, u), 2: [[ups / s]]}, "=", -1.0)
    for i in range(n):
        prob.add_constraint({0: unit(i, i, n)}, "<=", cap * cap * s)
    sol = sdp.solve(prob, tol=tol.sdp_tol, max_iter=tol.sdp_max_iter)
    if sol.status == sdp.INFEASIBLE:
        raise Infeasible("worst-case rate target unattainable under the per-LED caps")
    if sol.status != sdp.OPTIMAL:
        raise NoConvergence("robust beamforming SDP did not converge",
                            residuals=(sol.primal_residual, sol.dual_residual))
    P = sol.blocks[0] / s
    sq = np.sqrt(ups)

    def feas(x):
        wc = float(gg @ x - sq * np.linalg.norm(x))
        if wc <= 0:
            return None
        x = x / wc
        return x if x.max() <= cap * (1 + 1e-9) else None

    v = sdp.extract_rank_one(P, tol.rank_ratio)
    rank_one = v is not None
    if rank_one:
        v = feas(v)
        if v is not None:
            v = np.minimum(v, cap)
    if v is None:
        v = sdp.gaussian_randomization(P, feas, tol.n_randomization, seed)
    eps = link.signal_power
    p = np.zeros(N)
    p[act] = v
    Pfull = np.zeros((N, N))
    Pfull[np.ix_(act, act)] = P
    bf = Beamformer(p=p, P=Pfull, power=eps * float(p @ p), sdr_bound=eps * float(np.trace(P)),
                    rank_one=rank_one, sdp=sol)
    bf.eta = float(sol.blocks[2][0, 0]) * qos.c1 / s
    return bf


# ------------------------------------------------------------------ orientation

def solve_robust_orientation(p, rc: RobustChannel, snap: Snapshot, qos: QosSpec, n_init=E3,
                             rounds=DEFAULT.orientation_rounds):
    """Closed-form cone step on the midpoint steering vectors (q_lo + q_hi) / 2."""
    steer = np.asarray(p, dtype=float)[:, None] * 0.5 * (rc.q_lo + rc.q_hi)
    return orientation_step(steer, snap.d_vecs, snap.optics.fov, qos.theta_max, n_init, rounds)


@dataclass
class RobustAoResult(AoResult):
    channel: RobustChannel | None = None
    box: RotationBox = field(default_factory=RotationBox)
    worst_amplitude: float = 0.0


def robust_alternating_optimize(snap: Snapshot, qos: QosSpec, box: RotationBox, kappa=DEFAULT.ao_delta,
                                max_outer=DEFAULT.ao_max_outer, oar=True, tol: Tolerances = DEFAULT,
                                seed=0) -> RobustAoResult:
    link = snap.link
    if not np.any(snap.lam > 0):
        raise Infeasible("every LED is blocked or out of range")
    starts = initial_orientations(snap, qos.theta_max) if oar else [E3.copy()]
    first = None
    for n0 in starts:
        rc0 = channel_bounds(snap, n0, box, tol.bound_grid, tol.bound_margin)
        if not step2_screen(rc0.g_hat, qos, link):
            continue
        try:
            bf = solve_robust_beamforming(rc0, qos, link, tol, seed)
        except Infeasible:
            continue
        if first is None or bf.power < first[2].power:
            first = (n0, rc0, bf)
    if first is None:
        raise Infeasible("no initial orientation meets the worst-case rate target")
    n, rc, bf = first
    hist, nhist = [bf.power], [n]
    nonmono, converged, k = False, not oar, 1
    while oar and k < max_outer:
        try:
            ori = solve_robust_orientation(bf.p, rc, snap, qos, n, tol.orientation_rounds)
        except EmptyLedSet:
            converged = True
            break
        # keep a move only if the current beamformer stays robustly feasible,
        # backtracking towards n when the full step loses worst-case margin
        base = rc.worst_amplitude(bf.p)
        step = None
        for t in (1.0, 0.5, 0.25, 0.125, 0.0625):
            cand = n + t * (ori.n - n)
            cand = cone_argmax(cand, qos.theta_max)
            rc_c = channel_bounds(snap, cand, box, tol.bound_grid, tol.bound_margin)
            if rc_c.worst_amplitude(bf.p) >= base:
                step = (cand, rc_c)
                break
        if step is None:
            converged = True
            break
        n_new, rc_new = step
        moved = float(np.linalg.norm(n_new - n))
        try:
            bf_new = solve_robust_beamforming(rc_new, qos, link, tol, seed)
        except Infeasible:
            converged = True
            break
        k += 1
        if bf_new.power > hist[-1] + tol.monotone_slack * max(1.0, hist[-1]):
            nonmono = True
            log.warning("robust AO power increased: %.6g -> %.6g", hist[-1], bf_new.power)
        hist.append(bf_new.power)
        nhist.append(n_new)
        n, rc, bf = n_new, rc_new, bf_new
        if moved < kappa:
            converged = True
            break
    g = snap.gains(n).g
    return RobustAoResult(p=bf.p, n=n, power=bf.power, g=g, rate=rate(g, bf.p, snap.abg, link),
                          led_set=tuple(int(i) for i in np.flatnonzero(snap.gains(n).gamma_fov)),
                          iterations=max(k - 1, 1), converged=converged, power_history=hist, n_history=nhist,
                          nonmonotone=nonmono, channel=rc, box=box, worst_amplitude=rc.worst_amplitude(bf.p))


# ------------------------------------------------------------------ Monte Carlo check

@dataclass
class RobustnessReport:
    violation_rate: float
    rates: np.ndarray  # sorted
    cdf: np.ndarray
    angles: np.ndarray


def sample_box(box: RotationBox, n_mc: int, seed: int) -> np.ndarray:
    """One rotation error per trial, each from its own (seed, trial) stream."""
    return np.array([box.sample(np.random.default_rng([seed, i])) for i in range(n_mc)]).reshape(n_mc, 3)


def validate_robustness(p, n, snap: Snapshot, box: RotationBox, rate_min: float, n_mc=10_000, seed=0,
                        slack=1e-9) -> RobustnessReport:
    """Empirical rate distribution of a fixed (p, n) under random rotations in the box."""
    angles = sample_box(box, n_mc, seed)
    out = np.empty(n_mc)
    p = np.asarray(p, dtype=float)
    for s in range(0, n_mc, 2000):
        g = perturbed_gains(snap, np.asarray(n, float), angles[s:s + 2000])
        out[s:s + 2000] = rates(g @ p, snap.abg, snap.link)
    viol = float(np.mean(out < rate_min - slack)) if n_mc else 0.0
    order = np.sort(out)
    cdf = np.arange(1, n_mc + 1) / max(n_mc, 1)
    return RobustnessReport(violation_rate=viol, rates=order, cdf=cdf, angles=angles)
