"""Lambertian LOS channel, FOV gating and the ABG capacity lower bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, NoConvergence


def lambertian_order(half_angle: float) -> float:
    if not 0.0 < half_angle < np.pi / 2:
        raise ValueError("half-power angle must lie in (0, pi/2)")
    return -math.log(2.0) / math.log(math.cos(half_angle))


@dataclass(frozen=True)
class OpticalParams:
    half_angle: float = np.deg2rad(60.0)
    pd_area: float = 1e-4  # m^2
    fov: float = np.deg2rad(60.0)

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.half_angle)


@dataclass(frozen=True)
class LinkBudget:
    bandwidth: float = 1.0  # Hz; 1 gives per-unit-bandwidth rates
    noise_dbm: float = -98.82
    dc_bias: float = 1.0  # A
    amplitude: float = 1.0
    eps: float | None = None  # signal power; None -> amplitude**2 / 3

    @property
    def noise_power(self) -> float:
        return 10.0 ** ((self.noise_dbm - 30.0) / 10.0)

    @property
    def signal_power(self) -> float:
        return self.amplitude ** 2 / 3.0 if self.eps is None else float(self.eps)

    @property
    def amplitude_cap(self) -> float:
        """Largest admissible beamformer entry, from sqrt(p_i) * A <= I_DC."""
        return self.dc_bias / self.amplitude


@dataclass
class ChannelGains:
    g: np.ndarray
    lam: np.ndarray
    d_vecs: np.ndarray
    gamma_fov: np.ndarray


def incident_vectors(leds, ue, R) -> np.ndarray:
    """LED-minus-UE vectors expressed in the UE frame, shape (N, 3)."""
    diff = np.atleast_2d(np.asarray(leds, dtype=float)) - np.asarray(ue, dtype=float)
    return diff @ R


def gain_factors(leds, ue, optics: OpticalParams, blocked=None) -> np.ndarray:
    """Per-LED factor lambda_i so that g_i = lambda_i * d_i.n * Gamma_i."""
    leds = np.atleast_2d(np.asarray(leds, dtype=float))
    ue = np.asarray(ue, dtype=float)
    diff = leds - ue
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist == 0):
        raise DegenerateGeometry("UE coincides with an LED")
    m = optics.lambertian_order
    dz = diff[:, 2]
    lam = np.zeros(len(leds))
    up = dz > 0  # LEDs emit downwards; nothing reaches a UE at or above the LED
    lam[up] = optics.pd_area * (m + 1) * dz[up] ** m / (2 * np.pi * dist[up] ** (m + 3))
    if blocked is not None:
        lam = lam * (1 - np.asarray(blocked))
    return lam


def fov_indicator(d_vecs, n, fov: float) -> np.ndarray:
    d_vecs = np.atleast_2d(d_vecs)
    cos_inc = d_vecs @ np.asarray(n, dtype=float) / np.linalg.norm(d_vecs, axis=-1)
    return (cos_inc >= np.cos(fov)).astype(int)


def gain_vector(leds, ue, R, n, optics: OpticalParams, blocked=None) -> ChannelGains:
    d = incident_vectors(leds, ue, R)
    lam = gain_factors(leds, ue, optics, blocked)
    gam = fov_indicator(d, n, optics.fov)
    g = lam * (d @ np.asarray(n, dtype=float)) * gam
    return ChannelGains(g=np.maximum(g, 0.0), lam=lam, d_vecs=d, gamma_fov=gam)


# ---------------------------------------------------------------- ABG bound

@dataclass(frozen=True)
class AbgParams:
    alpha0: float
    beta0: float
    gamma0: float
    amplitude: float
    eps: float

    @property
    def exponent(self) -> float:
        """Exponent ``1 + 2 (alpha0 + gamma0 eps)`` of the ABG SNR factor."""
        return 1.0 + 2.0 * (self.alpha0 + self.gamma0 * self.eps)


def _moments_series(gamma, beta, A, kmax):
    # I_k = int_{-A}^{A} x^k exp(-beta x - gamma x^2) dx from the double power series
    # exp(-beta x) exp(-gamma x^2); fine for moderate |gamma| A^2 and |beta| A.
    # Coefficients are kept in the dimensionless products beta*A and gamma*A^2.
    out = np.zeros(kmax + 1)
    bA, gA2 = beta * A, gamma * A * A
    for k in range(kmax + 1):
        total = 0.0
        # sum_{j} (-bA)^j / j! * sum_n (-gA2)^n / n! * 2 / (k+j+2n+1), times A^(k+1)
        for j in range(0, 200):
            if (k + j) % 2:
                continue
            cj = (-bA) ** j / math.factorial(j) if beta != 0 else (1.0 if j == 0 else 0.0)
            if cj == 0.0:
                if j > 0:
                    break
                continue
            inner = 0.0
            term_g = 1.0
            for nn in range(0, 5000):
                term = term_g * 2.0 / (k + j + 2 * nn + 1)
                inner += term
                if nn > 2 and abs(term) <= 1e-18 * abs(inner):
                    break
                term_g *= -gA2 / (nn + 1)
            contrib = cj * inner
            total += contrib
            if j > 4 and abs(contrib) <= 1e-18 * abs(total):
                break
            if beta == 0:
                break
        out[k] = total * A ** (k + 1)
    return out


def even_moments(gamma: float, A: float) -> tuple[float, float, float]:
    """(I0, I2, I4) with I_k = int_{-A}^{A} x^k exp(-gamma x^2) dx, any sign of gamma."""
    ga2 = gamma * A * A
    if ga2 > 2.0:
        sg = math.sqrt(gamma)
        edge = math.exp(-ga2)
        i0 = math.sqrt(math.pi) / sg * math.erf(sg * A)
        i2 = (i0 - 2 * A * edge) / (2 * gamma)
        i4 = (3 * i2 - 2 * A ** 3 * edge) / (2 * gamma)
        return i0, i2, i4
    i0, _, i2, _, i4 = _moments_series(gamma, 0.0, A, 4)
    return i0, i2, i4


def T_func(x: float, beta0: float, gamma0: float) -> float:
    """Antiderivative of exp(-beta0 x - gamma0 x^2) in erf form (gamma0 > 0)."""
    sg = math.sqrt(gamma0)
    return (math.sqrt(math.pi) / (2 * sg) * math.exp(beta0 ** 2 / (4 * gamma0))
            * math.erf((beta0 + 2 * gamma0 * x) / (2 * sg)))


def abg_residuals(alpha0, beta0, gamma0, A, eps) -> np.ndarray:
    """Residuals of the three defining equations, each divided by exp(1 + alpha0).

    The first uses the erf antiderivative when gamma0 > 0 and the exact
    integral otherwise; the third is the variance equation as printed.
    """
    ea = math.exp(1 + alpha0)
    if gamma0 > 0:
        r_a = T_func(A, beta0, gamma0) - T_func(-A, beta0, gamma0) - ea
    else:
        r_a = _moments_series(gamma0, beta0, A, 0)[0] - ea
    e_neg = math.exp(A * (beta0 - gamma0 * A))
    e_pos = math.exp(-A * (beta0 + gamma0 * A))
    r_b = beta0 * (e_neg - e_pos - ea)
    r_c = (e_neg * ((beta0 - 2 * gamma0 * A) * math.exp(-2 * A * beta0) - beta0 - 2 * gamma0 * A)
           + (beta0 ** 2 + 2 * gamma0) * ea - 4 * gamma0 ** 2 * eps * ea)
    return np.array([r_a, r_b, r_c]) / ea


def _polish(x, r, cache, resid, jac, steps=4):
    # Extra full Newton steps down to round-off; the variance equation scales
    # the moment residual by ~4 gamma^2 eps, which is large when eps -> A^2.
    for _ in range(steps):
        try:
            xn = x + np.linalg.solve(jac(x, cache), -r)
            rn, cn = resid(xn)
        except (np.linalg.LinAlgError, OverflowError, ValueError):
            break
        if not np.all(np.isfinite(rn)) or np.linalg.norm(rn) >= np.linalg.norm(r):
            break
        x, r, cache = xn, rn, cn
    return x


def solve_abg(A: float, eps: float, *, symmetric: bool = True, tol: float = 1e-12,
              max_iter: int = 100) -> AbgParams:
    """Solve for (alpha0, beta0, gamma0) of the ABG bound.

    With ``symmetric`` (zero-mean, symmetric input) beta0 = 0 and a damped Newton
    iteration runs on (alpha0, gamma0) for
        I0(gamma0) = exp(1 + alpha0),   I2(gamma0) = eps * exp(1 + alpha0).
    Otherwise beta0 is kept as an unknown with the zero-mean condition I1 = 0.
    """
    if A <= 0 or not 0 < eps <= A * A:
        raise ValueError("need A > 0 and 0 < eps <= A^2")
    if not symmetric:
        return _solve_abg_full(A, eps, tol, max_iter)
    if A != 1.0:
        # scale invariance: gamma0 A^2 and alpha0 - log A depend on eps / A^2 only
        u = solve_abg(1.0, eps / (A * A), tol=tol, max_iter=max_iter)
        return AbgParams(u.alpha0 + math.log(A), 0.0, u.gamma0 / (A * A), float(A), float(eps))

    def resid(x):
        a, g = x
        i0, i2, i4 = even_moments(g, A)
        ea = math.exp(1 + a)
        return np.array([i0 / ea - 1.0, (i2 - eps * i0) / (A * A * i0)]), (i0, i2, i4, ea)

    def jac(x, cache):
        i0, i2, i4, ea = cache
        # d/da of i0/ea - 1 ; d/dg ; second row is independent of a
        dvar = (-i4 * i0 + i2 * i2) / (i0 * i0)  # d(I2/I0)/dgamma
        return np.array([[-i0 / ea, -i2 / ea], [0.0, dvar / (A * A)]])

    seeds = [(math.log(2 * A) - 1.0, 1.0 / (2 * eps)), (math.log(2 * A) - 1.0, 0.0)]
    seeds += [(math.log(2 * A) - 1.0, s / (A * A)) for s in (-20, -5, -1, 1, 5, 20, 80, -60, -150, -400)]
    last = None
    for seed in seeds:
        x = np.array(seed, dtype=float)
        r, cache = resid(x)
        for _ in range(max_iter):
            if np.max(np.abs(r)) < tol:
                break
            try:
                step = np.linalg.solve(jac(x, cache), -r)
            except np.linalg.LinAlgError:
                break
            t = 1.0
            nr = np.linalg.norm(r)
            while t > 1e-8:
                try:
                    r_new, c_new = resid(x + t * step)
                except (OverflowError, ValueError):
                    r_new = None
                if r_new is not None and np.all(np.isfinite(r_new)) and np.linalg.norm(r_new) < nr:
                    break
                t *= 0.5
            else:
                break
            x, r, cache = x + t * step, r_new, c_new
        last = r
        if np.max(np.abs(r)) < tol:
            x = _polish(x, r, cache, resid, jac)
            return AbgParams(float(x[0]), 0.0, float(x[1]), float(A), float(eps))
    raise NoConvergence("ABG parameter solve did not converge", residuals=last)


def _solve_abg_full(A, eps, tol, max_iter):
    # Unknowns (alpha0, beta0, gamma0); equations: normalisation, zero mean, variance.
    def moments(b, g):
        return _moments_series(g, b, A, 4)

    def resid(x):
        a, b, g = x
        m = moments(b, g)
        ea = math.exp(1 + a)
        return np.array([m[0] / ea - 1.0, m[1] / (A * m[0]), (m[2] - eps * m[0]) / (A * A * m[0])]), (m, ea)

    def jac(cache):
        m, ea = cache
        # d I_k / d beta = -I_{k+1}; d I_k / d gamma = -I_{k+2}
        J = np.zeros((3, 3))
        J[0] = [-m[0] / ea, -m[1] / ea, -m[2] / ea]
        J[1, 1] = (-m[2] * m[0] + m[1] * m[1]) / (A * m[0] ** 2)
        J[1, 2] = (-m[3] * m[0] + m[1] * m[2]) / (A * m[0] ** 2)
        J[2, 1] = (-m[3] * m[0] + m[2] * m[1]) / (A * A * m[0] ** 2)
        J[2, 2] = (-m[4] * m[0] + m[2] * m[2]) / (A * A * m[0] ** 2)
        return J

    sym = solve_abg(A, eps, symmetric=True, tol=tol, max_iter=max_iter)
    x = np.array([sym.alpha0, 0.0, sym.gamma0])
    r, cache = resid(x)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return AbgParams(float(x[0]), float(x[1]), float(x[2]), float(A), float(eps))
        x = x + np.linalg.lstsq(jac(cache), -r, rcond=None)[0]
        r, cache = resid(x)
    if np.max(np.abs(r)) < tol:
        return AbgParams(float(x[0]), float(x[1]), float(x[2]), float(A), float(eps))
    raise NoConvergence("full ABG solve did not converge", residuals=r)


def snr_factor(abg: AbgParams, link: LinkBudget) -> float:
    """Multiplier k such that SNR = k * (g.p)^2."""
    return math.exp(abg.exponent) / (2 * math.pi * link.bandwidth * link.noise_power)


def rate(g, p, abg: AbgParams, link: LinkBudget) -> float:
    gp = float(np.dot(g, p))
    return link.bandwidth * math.log2(1.0 + gp * gp * snr_factor(abg, link))


def rates(gp, abg: AbgParams, link: LinkBudget) -> np.ndarray:
    """Vectorised rate for an array of received amplitudes g.p."""
    gp = np.asarray(gp, dtype=float)
    return link.bandwidth * np.log2(1.0 + gp * gp * snr_factor(abg, link))


def rate_threshold(rate_min: float, abg: AbgParams, link: LinkBudget) -> float:
    """Smallest (g.p)^2 meeting ``rate_min``."""
    return (2.0 ** (rate_min / link.bandwidth) - 1.0) / snr_factor(abg, link)
