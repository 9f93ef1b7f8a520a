"""Euler rotations, Earth/UE frame transforms and PD orientation vectors.

Angles are radians. The UE attitude is ``R = R_yaw @ R_pitch @ R_roll`` with yaw
about Z, pitch about X and roll about Y.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonUnitInput

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class RotationAngles:
    alpha: float = 0.0  # yaw
    beta: float = 0.0  # pitch
    gamma: float = 0.0  # roll

    @classmethod
    def from_degrees(cls, alpha=0.0, beta=0.0, gamma=0.0):
        return cls(*np.deg2rad([alpha, beta, gamma]))

    def as_array(self):
        return np.array([self.alpha, self.beta, self.gamma])


@dataclass(frozen=True)
class PdOrientation:
    n: np.ndarray
    theta: float
    omega: float


def yaw_matrix(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def pitch_matrix(b):
    c, s = np.cos(b), np.sin(b)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def roll_matrix(g):
    c, s = np.cos(g), np.sin(g)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_matrix(angles) -> np.ndarray:
    """Return ``R_yaw @ R_pitch @ R_roll`` for a RotationAngles or (a, b, g) triple."""
    if isinstance(angles, RotationAngles):
        a, b, g = angles.alpha, angles.beta, angles.gamma
    else:
        a, b, g = angles
    if not np.all(np.isfinite([a, b, g])):
        raise ValueError("rotation angles must be finite")
    return yaw_matrix(a) @ pitch_matrix(b) @ roll_matrix(g)


def rotation_matrices(angles: np.ndarray) -> np.ndarray:
    """Vectorised :func:`rotation_matrix` over an (K, 3) array of angle triples."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    ca, sa = np.cos(angles[:, 0]), np.sin(angles[:, 0])
    cb, sb = np.cos(angles[:, 1]), np.sin(angles[:, 1])
    cg, sg = np.cos(angles[:, 2]), np.sin(angles[:, 2])
    k = len(angles)
    one, zero = np.ones(k), np.zeros(k)
    ra = np.stack([np.stack([ca, -sa, zero], -1), np.stack([sa, ca, zero], -1),
                   np.stack([zero, zero, one], -1)], 1)
    rb = np.stack([np.stack([one, zero, zero], -1), np.stack([zero, cb, -sb], -1),
                   np.stack([zero, sb, cb], -1)], 1)
    rg = np.stack([np.stack([cg, zero, sg], -1), np.stack([zero, one, zero], -1),
                   np.stack([-sg, zero, cg], -1)], 1)
    return ra @ rb @ rg


def to_ue_frame(R: np.ndarray, p: np.ndarray) -> np.ndarray:
    # R is orthonormal, so the inverse is the transpose.
    return np.asarray(p, dtype=float) @ R if np.ndim(p) > 1 else R.T @ np.asarray(p, dtype=float)


def to_earth_frame(R: np.ndarray, p: np.ndarray) -> np.ndarray:
    return R @ np.asarray(p, dtype=float)


def ue_normal_in_earth(R: np.ndarray) -> np.ndarray:
    """Earth-frame direction of the UE normal, i.e. ``R @ e3``."""
    return R @ E3


def pd_vector(theta: float, omega: float) -> PdOrientation:
    st = np.sin(theta)
    n = np.array([st * np.cos(omega), st * np.sin(omega), np.cos(theta)])
    return PdOrientation(n=n, theta=float(theta), omega=float(omega))


def pd_angles(n) -> tuple[float, float]:
    """Inverse of :func:`pd_vector`; azimuth is 0 at the pole."""
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > 1e-6:
        raise NonUnitInput(f"orientation vector has norm {norm:.9g}")
    n = n / norm
    rho = np.hypot(n[0], n[1])
    theta = float(np.arctan2(rho, n[2]))
    if rho == 0.0:
        return theta, 0.0
    omega = float(np.arctan2(n[1], n[0]))
    if omega >= np.pi:
        omega -= 2 * np.pi
    return theta, omega


def orientation(n) -> PdOrientation:
    theta, omega = pd_angles(n)
    return PdOrientation(n=np.asarray(n, dtype=float), theta=theta, omega=omega)


def in_cone(n, theta_max: float, tol: float = 1e-12) -> bool:
    """Elevation-cone membership in the Cartesian form used by the optimizer."""
    n = np.asarray(n, dtype=float)
    return bool(n[0] ** 2 + n[1] ** 2 <= np.sin(theta_max) ** 2 + tol
                and np.cos(theta_max) - tol <= n[2] <= 1 + tol)
