"""Numerical tolerances shared by the solvers."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    sdp_tol: float = 1e-8
    sdp_max_iter: int = 200
    psd_eig_tol: float = 1e-8
    rank_ratio: float = 1e-6
    n_randomization: int = 1000
    ao_delta: float = 1e-4
    ao_max_outer: int = 50
    orientation_rounds: int = 20
    monotone_slack: float = 1e-6
    rate_slack: float = 1e-6
    bound_grid: int = 5
    bound_margin: float = 0.01  # relative to the per-LED gain span


DEFAULT = Tolerances()
