"""Joint beamforming / PD-orientation design for a UE with known orientation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .channel import LinkBudget, fov_indicator, rate, rate_threshold, snr_factor
from .config import DEFAULT, Tolerances
from .errors import EmptyLedSet, Infeasible, NoConvergence, OrientationInfeasible
from .geometry import E3
from .scenario import Snapshot

log = logging.getLogger(__name__)

# entries of g below this fraction of max(g) are treated as dark links
_ACTIVE_REL = 1e-12


@dataclass(frozen=True)
class QosSpec:
    rate_min: float
    theta_max: float
    c1: float
    c2: float

    @classmethod
    def build(cls, rate_min, theta_max, abg, link: LinkBudget) -> "QosSpec":
        if not 0 <= theta_max <= np.pi / 2:
            raise ValueError("theta_max must lie in [0, pi/2]")
        c1 = rate_threshold(rate_min, abg, link)
        return cls(rate_min=float(rate_min), theta_max=float(theta_max), c1=c1, c2=float(np.sqrt(c1)))


@dataclass
class Beamformer:
    p: np.ndarray
    P: np.ndarray
    power: float  # eps * ||p||^2
    sdr_bound: float  # eps * tr(P)
    rank_one: bool
    sdp: sdp.SdpSolution | None = None


@dataclass
class AoResult:
    """Outcome of an alternating run; ``iterations`` counts beamforming/orientation cycles."""

    p: np.ndarray
    n: np.ndarray
    power: float
    g: np.ndarray
    rate: float
    led_set: tuple
    iterations: int
    converged: bool
    power_history: list = field(default_factory=list)
    n_history: list = field(default_factory=list)
    nonmonotone: bool = False
    status: str = "ok"


# ------------------------------------------------------------------ beamforming

def _active(g):
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("channel gains must be nonnegative")
    top = g.max(initial=0.0)
    return g > _ACTIVE_REL * top if top > 0 else np.zeros(len(g), bool)


def _finish(p_act, act, N):
    p = np.zeros(N)
    p[act] = p_act
    return p


def waterfill(g, target, cap):
    """Minimum-norm p >= 0 with g.p = target and p <= cap, or None if unreachable.

    The minimiser has the form p_i = min(nu g_i, cap).
    """
    g = np.asarray(g, dtype=float)
    if cap * g.sum() < target * (1 - 1e-12):
        return None
    pos = g > 0
    # capped LEDs are those with the largest gains; try each prefix
    order = np.argsort(-g[pos], kind="stable")
    gp = g[pos][order]
    for k in range(len(gp) + 1):
        free = gp[k:]
        if not free.size:
            break
        nu = (target - cap * gp[:k].sum()) / float(free @ free)
        if nu > 0 and nu * free[0] <= cap * (1 + 1e-12) and (k == 0 or nu * gp[k - 1] >= cap):
            out = np.zeros_like(g)
            vals = np.concatenate([np.full(k, cap), np.minimum(nu * free, cap)])
            tmp = np.empty_like(vals)
            tmp[order] = vals
            out[pos] = tmp
            return out
    out = np.where(pos, cap, 0.0)
    return out


def _equalise(p, g, c2, cap):
    """Scale p so that g.p = c2 exactly, then clip stray cap overshoot."""
    p = p * (c2 / float(g @ p))
    return np.minimum(p, cap)


def solve_beamforming(g, qos: QosSpec, link: LinkBudget, tol: Tolerances = DEFAULT, seed=0) -> Beamformer:
    """Minimum-power beamformer meeting the rate target for the gain vector ``g``."""
    g = np.asarray(g, dtype=float)
    N = len(g)
    act = _active(g)
    if not act.any():
        raise Infeasible("all channel gains are zero")
    # Work with Q = s P and the unit direction of g / c2, so the optimal trace is
    # O(1) and the solver's absolute tolerances act as relative ones.
    ga = g[act] / qos.c2
    s = float(ga @ ga)
    u = ga / np.sqrt(s)
    cap = link.amplitude_cap
    n = len(u)
    prob = sdp.SdpProblem([n])
    prob.set_cost(0, np.eye(n))
    prob.add_constraint({0: np.outer(u, u)}, ">=", 1.0)
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        prob.add_constraint({0: E}, "<=", cap * cap * s)
    sol = sdp.solve(prob, tol=tol.sdp_tol, max_iter=tol.sdp_max_iter)
    if sol.status == sdp.INFEASIBLE:
        raise Infeasible("rate target unattainable under the per-LED caps")
    if sol.status != sdp.OPTIMAL:
        raise NoConvergence("beamforming SDP did not converge",
                            residuals=(sol.primal_residual, sol.dual_residual))
    P = sol.blocks[0] / s
    v = sdp.extract_rank_one(P, tol.rank_ratio)
    rank_one = v is not None
    if rank_one:
        v = _equalise(v, ga, 1.0, cap)
    else:
        def feas(x):
            x = x / float(ga @ x)
            return x if x.max() <= cap * (1 + 1e-9) else None
        v = sdp.gaussian_randomization(P, feas, tol.n_randomization, seed)
    # The trace objective is flat to second order in the direction of p, so the
    # recovered vector is only accurate to about sqrt(tol). Polish it with the
    # stationarity conditions p = min(nu g, cap), keeping whichever is cheaper.
    w = waterfill(ga, 1.0, cap)
    if w is not None and w @ w <= v @ v:
        v = w
    eps = link.signal_power
    Pfull = np.zeros((N, N))
    Pfull[np.ix_(act, act)] = P
    p = _finish(v, act, N)
    return Beamformer(p=p, P=Pfull, power=eps * float(p @ p), sdr_bound=eps * float(np.trace(P)),
                      rank_one=rank_one, sdp=sol)


# ------------------------------------------------------------------ orientation

def cone_argmax(w, theta_max):
    """Unit vector in the cone {n_z >= cos(theta_max)} maximising w.n."""
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        return E3.copy()
    wxy = np.hypot(w[0], w[1])
    theta = min(float(np.arctan2(wxy, w[2])), float(theta_max))
    s, c = np.sin(theta), np.cos(theta)
    if wxy == 0:
        return np.array([s, 0.0, c])
    return np.array([s * w[0] / wxy, s * w[1] / wxy, c])


def _objective(steer, gate_vecs, fov, n):
    """sum_i steer_i.n over LEDs whose incidence direction is inside the FOV at n."""
    return float(np.sum((steer @ n) * fov_indicator(gate_vecs, n, fov)))


@dataclass
class OrientationResult:
    n: np.ndarray
    led_set: tuple
    rounds: int
    objective: float
    cycled: bool = False


def orientation_step(steer, gate_vecs, fov, theta_max, n_init,
                     rounds=DEFAULT.orientation_rounds) -> OrientationResult:
    """Fixed-point search over the visible-LED set.

    ``steer`` holds one weighted incidence vector per LED, so the objective is
    the sum of steer_i.n over the LEDs that ``gate_vecs`` places inside the FOV.
    The best orientation seen, including ``n_init``, is returned.
    """
    steer = np.asarray(steer, dtype=float)
    n = np.asarray(n_init, dtype=float)
    M = tuple(np.flatnonzero(fov_indicator(gate_vecs, n, fov)))
    if not M or not np.any(steer[list(M)]):
        raise EmptyLedSet("no LED with positive weight is inside the field of view")
    best = (_objective(steer, gate_vecs, fov, n), n, M)
    seen = {M}
    cycled = False
    k = 0
    for k in range(1, rounds + 1):
        w = steer[list(M)].sum(axis=0)
        if not np.any(w):
            break
        n = cone_argmax(w, theta_max)
        val = _objective(steer, gate_vecs, fov, n)
        M_new = tuple(np.flatnonzero(fov_indicator(gate_vecs, n, fov)))
        if val > best[0]:
            best = (val, n, M_new)
        if M_new == M:
            break
        if M_new in seen or not M_new:
            cycled = bool(M_new)
            if cycled:
                log.info("visible-LED set cycles; keeping the better orientation")
            break
        seen.add(M_new)
        M = M_new
    return OrientationResult(n=best[1], led_set=best[2], rounds=k, objective=best[0], cycled=cycled)


def _steer(snap: Snapshot, p):
    return (snap.lam * np.asarray(p, dtype=float))[:, None] * snap.d_vecs


def solve_orientation(p, snap: Snapshot, qos: QosSpec, n_init=E3, rounds=DEFAULT.orientation_rounds,
                      slack=DEFAULT.rate_slack) -> OrientationResult:
    """PD orientation maximising g(n).p for fixed p; errors if the rate target is out of reach."""
    res = orientation_step(_steer(snap, p), snap.d_vecs, snap.optics.fov, qos.theta_max, n_init, rounds)
    if res.objective < qos.c2 * (1 - slack):
        raise OrientationInfeasible("no orientation meets the rate target for this beamformer")
    return res


# ------------------------------------------------------------------ alternating loop

def initial_orientations(snap: Snapshot, theta_max):
    """Centroid of unblocked incidence directions projected into the cone, then broadside."""
    cands = []
    vis = snap.lam > 0
    if vis.any():
        d = snap.d_vecs[vis]
        w = (d / np.linalg.norm(d, axis=1, keepdims=True)).sum(axis=0)
        cands.append(cone_argmax(w, theta_max))
    if not cands or not np.allclose(cands[0], E3):
        cands.append(E3.copy())
    return cands


def step2_screen(g, qos: QosSpec, link: LinkBudget) -> bool:
    """Necessary condition sum(g) >= c2 A / I_DC for the rate target to be reachable."""
    return float(np.sum(g)) >= qos.c2 * link.amplitude / link.dc_bias * (1 - 1e-12)


def alternating_optimize(snap: Snapshot, qos: QosSpec, delta=DEFAULT.ao_delta, max_outer=DEFAULT.ao_max_outer,
                         oar=True, tol: Tolerances = DEFAULT, seed=0) -> AoResult:
    link = snap.link
    if not np.any(snap.lam > 0):
        raise Infeasible("every LED is blocked or out of range")
    starts = initial_orientations(snap, qos.theta_max) if oar else [E3.copy()]
    first = None
    for n0 in starts:
        g0 = snap.gains(n0).g
        if not step2_screen(g0, qos, link):
            continue
        try:
            bf = solve_beamforming(g0, qos, link, tol, seed)
        except Infeasible:
            continue
        if first is None or bf.power < first[1].power:
            first = (n0, bf)
    if first is None:
        raise Infeasible("no initial orientation reaches the rate target")
    n, bf = first
    hist, nhist = [bf.power], [n]
    nonmono, converged, k = False, not oar, 1
    led_set = tuple(np.flatnonzero(snap.gains(n).gamma_fov))
    while oar and k < max_outer:
        ori = orientation_step(_steer(snap, bf.p), snap.d_vecs, snap.optics.fov, qos.theta_max, n,
                               tol.orientation_rounds)
        n_new = ori.n
        moved = float(np.linalg.norm(n_new - n))
        bf_new = solve_beamforming(snap.gains(n_new).g, qos, link, tol, seed)
        k += 1
        if bf_new.power > hist[-1] + tol.monotone_slack * max(1.0, hist[-1]):
            nonmono = True
            log.warning("AO power increased: %.6g -> %.6g", hist[-1], bf_new.power)
        hist.append(bf_new.power)
        nhist.append(n_new)
        n, bf, led_set = n_new, bf_new, ori.led_set
        if moved < delta:
            converged = True
            break
    g = snap.gains(n).g
    return AoResult(p=bf.p, n=n, power=bf.power, g=g, rate=rate(g, bf.p, snap.abg, link),
                    led_set=tuple(int(i) for i in led_set), iterations=max(k - 1, 1), converged=converged,
                    power_history=hist, n_history=nhist, nonmonotone=nonmono)


# ------------------------------------------------------------------ fixed-budget rate

def budget_beamformer(g, budget, link: LinkBudget, tol=1e-13):
    """Maximise g.p subject to eps ||p||^2 <= budget and 0 <= p <= cap."""
    g = np.asarray(g, dtype=float)
    cap = link.amplitude_cap
    r2 = budget / link.signal_power
    act = g > 0
    if not act.any():
        return np.zeros_like(g)
    if cap * cap * act.sum() <= r2:
        return np.where(act, cap, 0.0)
    lo, hi = 0.0, cap / g[act].min()
    for _ in range(200):
        t = 0.5 * (lo + hi)
        if np.sum(np.minimum(t * g, cap) ** 2) > r2:
            hi = t
        else:
            lo = t
        if hi - lo <= tol * hi:
            break
    return np.minimum(lo * g, cap)


def max_rate_at_budget(snap: Snapshot, theta_max, budget=0.1, oar=True, delta=DEFAULT.ao_delta,
                       max_outer=DEFAULT.ao_max_outer, tol: Tolerances = DEFAULT) -> AoResult:
    """Alternate the budget-limited beamformer and the orientation step to maximise the rate."""
    link = snap.link
    n = E3.copy()
    g = snap.gains(n).g
    p = budget_beamformer(g, budget, link)
    hist, nhist, k, converged = [float(g @ p)], [n], 1, not oar
    if not np.any(snap.lam > 0):
        converged = True
    while oar and not converged and k < max_outer:
        start = n if p.any() else initial_orientations(snap, theta_max)[0]
        try:
            ori = orientation_step(_steer(snap, p if p.any() else np.ones_like(p)), snap.d_vecs,
                                   snap.optics.fov, theta_max, start, tol.orientation_rounds)
        except EmptyLedSet:
            converged = True
            break
        g_new = snap.gains(ori.n).g
        p_new = budget_beamformer(g_new, budget, link)
        k += 1
        moved = float(np.linalg.norm(ori.n - n))
        if float(g_new @ p_new) < hist[-1]:
            converged = True
            break
        n, g, p = ori.n, g_new, p_new
        hist.append(float(g @ p))
        nhist.append(n)
        converged = moved < delta
    return AoResult(p=p, n=n, power=link.signal_power * float(p @ p), g=g, rate=rate(g, p, snap.abg, link),
                    led_set=tuple(int(i) for i in np.flatnonzero(snap.gains(n).gamma_fov)),
                    iterations=max(k - 1, 1), converged=converged, power_history=hist, n_history=nhist)
