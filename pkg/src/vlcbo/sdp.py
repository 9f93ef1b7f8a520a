"""Small dense semidefinite programming core.

Problems are stated over a list of symmetric matrix blocks (1x1 blocks are plain
nonnegative scalars) with linear equality/inequality constraints, and solved by
a primal-dual path-following method on the homogeneous self-dual embedding with
Nesterov-Todd scaling and a Mehrotra predictor-corrector step. The embedding
returns either an optimal pair with a certified duality gap or an
infeasibility certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import NoFeasibleCandidate

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
MAXITER = "MaxIter"

_SENSES = ("<=", "=", ">=")


@dataclass
class Constraint:
    coeffs: dict  # block index -> symmetric coefficient matrix (or scalar for 1x1 blocks)
    sense: str
    rhs: float


@dataclass
class SdpProblem:
    """min sum_b <C_b, X_b>  s.t.  sum_b <A_kb, X_b> (<=|=|>=) b_k,  X_b PSD."""

    block_sizes: list
    cost: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        self.block_sizes = [int(n) for n in self.block_sizes]
        if any(n < 1 for n in self.block_sizes):
            raise ValueError("block sizes must be positive")
        self.cost = {b: self._mat(b, c) for b, c in self.cost.items()}

    def _mat(self, b, a):
        n = self.block_sizes[b]
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a.shape != (n, n):
            raise ValueError(f"block {b}: expected {n}x{n} coefficients, got {a.shape}")
        return 0.5 * (a + a.T)

    def set_cost(self, block, C):
        self.cost[block] = self._mat(block, C)

    def add_constraint(self, coeffs, sense, rhs):
        if sense not in _SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        coeffs = {b: self._mat(b, a) for b, a in coeffs.items()}
        self.constraints.append(Constraint(coeffs, sense, float(rhs)))
        return len(self.constraints) - 1

    def to_text(self) -> str:
        """Plain-text listing: block sizes, cost and constraint triplets (1-based indices).

        ``blocks n1 n2 ...``, then ``cost b i j v`` lines (upper triangle), then per
        constraint ``con k sense rhs`` followed by ``coef k b i j v`` lines.
        """
        lines = ["blocks " + " ".join(str(n) for n in self.block_sizes)]
        for b in sorted(self.cost):
            lines += [f"cost {b + 1} {i + 1} {j + 1} {v:.17g}" for i, j, v in _triplets(self.cost[b])]
        for k, con in enumerate(self.constraints):
            lines.append(f"con {k + 1} {con.sense} {con.rhs:.17g}")
            for b in sorted(con.coeffs):
                lines += [f"coef {k + 1} {b + 1} {i + 1} {j + 1} {v:.17g}"
                          for i, j, v in _triplets(con.coeffs[b])]
        return "\n".join(lines) + "\n"


def _triplets(a):
    iu = np.triu_indices(a.shape[0])
    return [(i, j, a[i, j]) for i, j in zip(*iu) if a[i, j] != 0.0]


@dataclass
class SdpSolution:
    blocks: list
    objective: float
    dual_objective: float
    status: str
    y: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    certificate: str | None = None  # 'primal' or 'dual' infeasibility when status is Infeasible
    history: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return abs(self.objective - self.dual_objective)

    @property
    def rel_gap(self) -> float:
        return self.gap / (1.0 + abs(self.objective))


# ------------------------------------------------------------ standard form

@dataclass
class _Standard:
    b: np.ndarray
    c_l: np.ndarray
    A_l: np.ndarray  # (m, nl)
    C_s: list
    A_s: list  # each (m, n, n)
    lp_of_block: dict  # user 1x1 block -> LP column
    sdp_of_block: dict  # user block -> index into C_s/A_s


def _standardize(prob: SdpProblem) -> _Standard:
    m = len(prob.constraints)
    lp_of_block, sdp_of_block = {}, {}
    for blk, n in enumerate(prob.block_sizes):
        if n == 1:
            lp_of_block[blk] = len(lp_of_block)
        else:
            sdp_of_block[blk] = len(sdp_of_block)
    n_slack = sum(con.sense != "=" for con in prob.constraints)
    nl = len(lp_of_block) + n_slack
    A_l = np.zeros((m, nl))
    c_l = np.zeros(nl)
    sizes = [prob.block_sizes[blk] for blk in sdp_of_block]
    A_s = [np.zeros((m, n, n)) for n in sizes]
    C_s = [np.zeros((n, n)) for n in sizes]
    b = np.array([con.rhs for con in prob.constraints], dtype=float)
    for blk, C in prob.cost.items():
        if blk in lp_of_block:
            c_l[lp_of_block[blk]] = C[0, 0]
        else:
            C_s[sdp_of_block[blk]] = C.copy()
    slack = len(lp_of_block)
    for k, con in enumerate(prob.constraints):
        for blk, a in con.coeffs.items():
            if blk in lp_of_block:
                A_l[k, lp_of_block[blk]] = a[0, 0]
            else:
                A_s[sdp_of_block[blk]][k] = a
        if con.sense == "<=":
            A_l[k, slack] = 1.0
            slack += 1
        elif con.sense == ">=":
            A_l[k, slack] = -1.0
            slack += 1
    return _Standard(b, c_l, A_l, C_s, A_s, lp_of_block, sdp_of_block)


# ------------------------------------------------------------ the solver

def _sym(a):
    return 0.5 * (a + a.T)


def _max_step(lam, dtil_l, mats_x, mats_s, lam_s, dt, t, dk, k):
    """Largest alpha keeping all cone variables nonnegative (inf if unbounded)."""
    ratios = [np.inf]
    if lam.size:
        r = np.concatenate([dtil_l[0] / lam, dtil_l[1] / lam])
        rmin = r.min()
        if rmin < 0:
            ratios.append(-1.0 / rmin)
    for d, (mx, ms) in zip(lam_s, zip(mats_x, mats_s)):
        isq = 1.0 / np.sqrt(d)
        for mtil in (mx, ms):
            e = np.linalg.eigvalsh(_sym(isq[:, None] * mtil * isq[None, :]))[0]
            if e < 0:
                ratios.append(-1.0 / e)
    for v, dv in ((t, dt), (k, dk)):
        if dv < 0:
            ratios.append(-v / dv)
    return min(ratios)


def solve(problem: SdpProblem, tol: float = DEFAULT.sdp_tol,
          max_iter: int = DEFAULT.sdp_max_iter) -> SdpSolution:
    std = _standardize(problem)
    b, c_l, A_l, C_s, A_s = std.b, std.c_l, std.A_l, std.C_s, std.A_s
    m, nl = A_l.shape
    sizes = [C.shape[0] for C in C_s]
    nu = nl + sum(sizes)
    nb = max(1.0, np.linalg.norm(b))
    nc = max(1.0, np.sqrt(c_l @ c_l + sum(np.sum(C * C) for C in C_s)))

    x_l, s_l = np.ones(nl), np.ones(nl)
    X = [np.eye(n) for n in sizes]
    S = [np.eye(n) for n in sizes]
    y = np.zeros(m)
    tau = kappa = 1.0

    def A_op(v_l, V):
        out = A_l @ v_l
        for Ab, Vb in zip(A_s, V):
            out = out + np.einsum("jpq,pq->j", Ab, Vb)
        return out

    def AT_op(w):
        return A_l.T @ w, [np.einsum("j,jpq->pq", w, Ab) for Ab in A_s]

    def inner(u_l, U, v_l, V):
        return float(u_l @ v_l + sum(np.sum(Ub * Vb) for Ub, Vb in zip(U, V)))

    history = []
    status, certificate = MAXITER, None
    it = 0
    for it in range(max_iter + 1):
        aty_l, aty_s = AT_op(y)
        F1 = A_op(x_l, X) - b * tau
        F2_l = aty_l + s_l - c_l * tau
        F2_s = [a + s - C * tau for a, s, C in zip(aty_s, S, C_s)]
        cx = inner(c_l, C_s, x_l, X)
        by = float(b @ y)
        F3 = by - cx - kappa
        xs = inner(x_l, X, s_l, S)
        mu = (xs + tau * kappa) / (nu + 1)
        pobj, dobj = cx / tau, by / tau
        pres = np.linalg.norm(F1) / tau / nb
        dres = np.sqrt(F2_l @ F2_l + sum(np.sum(F * F) for F in F2_s)) / tau / nc
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        history.append({"iter": it, "pobj": pobj, "dobj": dobj, "pres": pres, "dres": dres,
                        "complementarity": xs / tau ** 2, "mu": mu})
        if pres <= tol and dres <= tol and rel_gap <= tol:
            status = OPTIMAL
            break
        if by > 0:
            r = np.sqrt(np.sum((aty_l + s_l) ** 2) + sum(np.sum((a + s) ** 2) for a, s in zip(aty_s, S)))
            if r / by <= tol:
                status, certificate = INFEASIBLE, "primal"
                break
        if cx < 0:
            if np.linalg.norm(A_op(x_l, X)) / (-cx) <= tol:
                status, certificate = INFEASIBLE, "dual"
                break
        if it == max_iter:
            break

        # Nesterov-Todd scaling
        try:
            G, Ginv, lam_s = [], [], []
            for Xb, Sb in zip(X, S):
                Lx = np.linalg.cholesky(Xb)
                Ls = np.linalg.cholesky(Sb)
                _, d, vt = np.linalg.svd(Ls.T @ Lx)
                Gb = Lx @ vt.T / np.sqrt(d)[None, :]
                G.append(Gb)
                Ginv.append(np.linalg.solve(Gb, np.eye(len(d))))
                lam_s.append(d)
        except np.linalg.LinAlgError:
            break
        w_l = np.sqrt(x_l / s_l)
        lam_l = np.sqrt(x_l * s_l)
        W = [Gb @ Gb.T for Gb in G]
        WAW = [Wb[None] @ Ab @ Wb[None] for Wb, Ab in zip(W, A_s)]
        M = (A_l * w_l ** 2) @ A_l.T
        for Ab, WA in zip(A_s, WAW):
            M = M + np.einsum("jpq,kpq->jk", Ab, WA)
        AWc = A_l @ (w_l ** 2 * c_l)
        cWc = float(c_l @ (w_l ** 2 * c_l))
        for WA, C, Wb in zip(WAW, C_s, W):
            AWc = AWc + np.einsum("jpq,pq->j", WA, C)
            cWc += float(np.sum(C * (Wb @ C @ Wb)))
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = M
        K[:m, m] = -(AWc + b)
        K[m, :m] = b - AWc
        K[m, m] = cWc + kappa / tau

        def newton(rhs_l, rhs_s, r_tk, eta):
            z_l = rhs_l / lam_l
            R_l = w_l * z_l
            R_s = []
            for Gb, d, rh in zip(G, lam_s, rhs_s):
                Z = 2.0 * rh / (d[:, None] + d[None, :])
                R_s.append(Gb @ Z @ Gb.T)
            T_l = R_l + w_l ** 2 * (eta * F2_l)
            T_s = [R + Wb @ (eta * F) @ Wb for R, Wb, F in zip(R_s, W, F2_s)]
            r1 = -eta * F1 - A_op(T_l, T_s)
            r2 = -eta * F3 + inner(c_l, C_s, T_l, T_s) + r_tk / tau
            rhs = np.append(r1, r2)
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            dy, dtau = sol[:m], sol[m]
            dat_l, dat_s = AT_op(dy)
            dS_l = -eta * F2_l - dat_l + c_l * dtau
            dS_s = [-eta * F - a + C * dtau for F, a, C in zip(F2_s, dat_s, C_s)]
            dX_l = R_l - w_l ** 2 * dS_l
            dX_s = [_sym(R - Wb @ dS @ Wb) for R, Wb, dS in zip(R_s, W, dS_s)]
            dS_s = [_sym(d) for d in dS_s]
            dkappa = (r_tk - kappa * dtau) / tau
            # scaled copies for step length and the second-order term
            tx_l, ts_l = dX_l / w_l, dS_l * w_l
            tX = [Gi @ dX @ Gi.T for Gi, dX in zip(Ginv, dX_s)]
            tS = [Gb.T @ dS @ Gb for Gb, dS in zip(G, dS_s)]
            return dict(dx_l=dX_l, ds_l=dS_l, dX=dX_s, dS=dS_s, dy=dy, dtau=dtau, dkappa=dkappa,
                        tx_l=tx_l, ts_l=ts_l, tX=tX, tS=tS)

        def step_of(d):
            return _max_step(lam_l, (d["tx_l"], d["ts_l"]), d["tX"], d["tS"], lam_s,
                             d["dtau"], tau, d["dkappa"], kappa)

        # predictor
        aff = newton(-lam_l ** 2, [-np.diag(d ** 2) for d in lam_s], -tau * kappa, 1.0)
        a_aff = min(1.0, step_of(aff))
        sigma = (1.0 - a_aff) ** 3
        # corrector
        rhs_l = sigma * mu - lam_l ** 2 - aff["tx_l"] * aff["ts_l"]
        rhs_s = [sigma * mu * np.eye(len(d)) - np.diag(d ** 2) - _sym(tx @ ts)
                 for d, tx, ts in zip(lam_s, aff["tX"], aff["tS"])]
        r_tk = sigma * mu - tau * kappa - aff["dtau"] * aff["dkappa"]
        dirn = newton(rhs_l, rhs_s, r_tk, 1.0 - sigma)
        alpha = min(1.0, 0.99 * step_of(dirn))

        x_l = x_l + alpha * dirn["dx_l"]
        s_l = s_l + alpha * dirn["ds_l"]
        X = [_sym(Xb + alpha * d) for Xb, d in zip(X, dirn["dX"])]
        S = [_sym(Sb + alpha * d) for Sb, d in zip(S, dirn["dS"])]
        y = y + alpha * dirn["dy"]
        tau = tau + alpha * dirn["dtau"]
        kappa = kappa + alpha * dirn["dkappa"]

    scale = 1.0 / tau if status != INFEASIBLE else 1.0
    blocks = []
    for blk, n in enumerate(problem.block_sizes):
        if blk in std.lp_of_block:
            blocks.append(np.array([[x_l[std.lp_of_block[blk]] * scale]]))
        else:
            blocks.append(X[std.sdp_of_block[blk]] * scale)
    last = history[-1]
    return SdpSolution(blocks=blocks, objective=last["pobj"], dual_objective=last["dobj"],
                       status=status, y=y * scale, iterations=it,
                       primal_residual=last["pres"], dual_residual=last["dres"],
                       certificate=certificate, history=history)


# ------------------------------------------------------------ rank-one recovery

def extract_rank_one(X, ratio_tol: float = DEFAULT.rank_ratio):
    """sqrt(lambda1) v1 with entrywise absolute value, or None if X is not numerically rank one."""
    X = _sym(np.atleast_2d(np.asarray(X, dtype=float)))
    vals, vecs = np.linalg.eigh(X)
    l1 = vals[-1]
    if l1 <= 0:
        return None
    l2 = vals[-2] if len(vals) > 1 else 0.0
    if max(l2, 0.0) / l1 > ratio_tol:
        return None
    return np.abs(np.sqrt(l1) * vecs[:, -1])


def gaussian_randomization(X, feasibility, n_samples: int = DEFAULT.n_randomization, seed=0):
    """Best feasible candidate from samples xi ~ N(0, X).

    ``feasibility(v)`` receives the nonnegative candidate ``|xi|`` and returns
    the minimally rescaled feasible vector, or None when no scaling works.
    """
    X = _sym(np.atleast_2d(np.asarray(X, dtype=float)))
    vals, vecs = np.linalg.eigh(X)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))[None, :]
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, X.shape[0]))
    best, best_pow = None, np.inf
    for xi in np.abs(z @ root.T):
        if not np.any(xi > 0):
            continue
        cand = feasibility(xi)
        if cand is None:
            continue
        pw = float(cand @ cand)
        if pw < best_pow:
            best, best_pow = cand, pw
    if best is None:
        raise NoFeasibleCandidate(f"no feasible candidate among {n_samples} samples")
    return best
