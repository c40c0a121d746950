"""Scalar building blocks: cutoff windows, energy denominators, projector
algebra, and the closed forms used as test oracles.

Units are fixed so that the bare mass, the speed of light, and hbar are all 1;
cutoffs are dimensionless ratios against the bare mass.  All functions accept
numpy arrays transparently wherever the formula allows it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CutoffWindow",
    "PolarPoint",
    "CartesianPair",
    "a1_closed",
    "polar_denominators",
    "rho_and_delta",
    "transverse_projector",
    "projector_contractions",
    "cartesian_denominators",
]


@dataclass(frozen=True)
class CutoffWindow:
    """Dimensionless photon-momentum window kappa <= |k| <= lam."""

    lam: float
    kappa: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.kappa <= self.lam):
            raise ValueError(
                f"cutoff window requires 0 <= kappa <= lambda, "
                f"got kappa={self.kappa}, lambda={self.lam}"
            )

    @property
    def empty(self) -> bool:
        return self.kappa == self.lam


@dataclass(frozen=True)
class PolarPoint:
    """Two radial momenta and the cosine of their relative angle."""

    r1: float
    r2: float
    X: float

    def __post_init__(self) -> None:
        if not (np.all(np.asarray(self.r1) >= 0) and np.all(np.asarray(self.r2) >= 0)):
            raise ValueError("radial momenta must be nonnegative")
        X = np.asarray(self.X)
        if not np.all((-1.0 <= X) & (X <= 1.0)):
            raise ValueError("X must lie in [-1, 1]")


@dataclass(frozen=True)
class CartesianPair:
    """A pair of 3-vector momenta; arrays of shape (..., 3) are accepted."""

    k1: np.ndarray
    k2: np.ndarray


def a1_closed(w: CutoffWindow) -> float:
    """First-order coefficient, (8/(3 pi)) log((lam+2)/(kappa+2))."""
    return 8.0 / (3.0 * math.pi) * math.log((w.lam + 2.0) / (w.kappa + 2.0))


def polar_denominators(p: PolarPoint):
    """(L1, L2, 1/F12) with L_j = 1/(r_j^2/2 + r_j) and
    F12 = (r1^2 + 2 r1 r2 X + r2^2)/2 + r1 + r2.
    """
    r1 = np.asarray(p.r1, dtype=float)
    r2 = np.asarray(p.r2, dtype=float)
    if np.any((r1 == 0.0) & (r2 == 0.0)):
        raise ZeroDivisionError("denominators vanish at r1 = r2 = 0")
    L1 = 1.0 / (0.5 * r1 * r1 + r1)
    L2 = 1.0 / (0.5 * r2 * r2 + r2)
    F12 = 0.5 * (r1 * r1 + 2.0 * r1 * r2 * np.asarray(p.X) + r2 * r2) + r1 + r2
    out = (L1, L2, 1.0 / F12)
    if np.ndim(p.r1) == 0 and np.ndim(p.r2) == 0 and np.ndim(p.X) == 0:
        return tuple(float(v) for v in out)
    return out


def rho_and_delta(r, X, lam):
    """rho = r^2 + 2 lam r X + lam^2 + 2r + 2 lam and its completed-square
    remainder delta = lam^2 (1 - X^2) + 2 lam (1 - X) - 1, so that
    rho = (r + lam X + 1)^2 + delta identically.
    """
    r = np.asarray(r, dtype=float)
    X = np.asarray(X, dtype=float)
    rho = r * r + 2.0 * lam * r * X + lam * lam + 2.0 * r + 2.0 * lam
    delta = lam * lam * (1.0 - X * X) + 2.0 * lam * (1.0 - X) - 1.0
    if rho.ndim == 0 and np.ndim(delta) == 0:
        return float(rho), float(delta)
    return rho, np.broadcast_to(delta, rho.shape) if np.ndim(delta) < rho.ndim else delta


def transverse_projector(k: np.ndarray) -> np.ndarray:
    """Q(k) = I - khat khat^T, the projection transverse to k."""
    k = np.asarray(k, dtype=float)
    n2 = np.sum(k * k, axis=-1, keepdims=True)
    if np.any(n2 == 0.0):
        raise ValueError("transverse projector undefined for the zero vector")
    outer = k[..., :, None] * k[..., None, :] / n2[..., None]
    return np.eye(3) - outer


def projector_contractions(k1: np.ndarray, k2: np.ndarray, path: str = "closed"):
    """Contractions of the transverse projectors Q1 = Q(k1), Q2 = Q(k2):

    trQQ       = tr[Q1 Q2]          = 1 + s^2
    bilinearQQ = (k2, Q1 Q2 k1)     = (k1 . k2)(s^2 - 1)
    quad1      = (k1, Q2 k1)        = |k1|^2 (1 - s^2)
    quad2      = (k2, Q1 k2)        = |k2|^2 (1 - s^2)

    with s = khat1 . khat2.  path="matrix" evaluates the 3x3 products
    explicitly; the two paths agree to rounding.
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    n1 = np.linalg.norm(k1, axis=-1)
    n2 = np.linalg.norm(k2, axis=-1)
    if np.any(n1 == 0.0) or np.any(n2 == 0.0):
        raise ValueError("projector contractions undefined for zero vectors")
    if path == "closed":
        dot = np.sum(k1 * k2, axis=-1)
        s = dot / (n1 * n2)
        s2 = s * s
        return 1.0 + s2, dot * (s2 - 1.0), n1 * n1 * (1.0 - s2), n2 * n2 * (1.0 - s2)
    if path == "matrix":
        Q1 = transverse_projector(k1)
        Q2 = transverse_projector(k2)
        Q1Q2 = Q1 @ Q2
        trQQ = np.trace(Q1Q2, axis1=-2, axis2=-1)
        bilinear = np.einsum("...i,...ij,...j->...", k2, Q1Q2, k1)
        quad1 = np.einsum("...i,...ij,...j->...", k1, Q2, k1)
        quad2 = np.einsum("...i,...ij,...j->...", k2, Q1, k2)
        return trQQ, bilinear, quad1, quad2
    raise ValueError(f"unknown contraction path {path!r}")


def cartesian_denominators(c: CartesianPair):
    """(1/E1, 1/E2, 1/E12) with E_j = |k_j|^2/2 + |k_j| and
    E12 = |k1+k2|^2/2 + |k1| + |k2|.  Reduces exactly to polar_denominators
    under r_j = |k_j|, X = khat1 . khat2.
    """
    k1 = np.asarray(c.k1, dtype=float)
    k2 = np.asarray(c.k2, dtype=float)
    n1 = np.linalg.norm(k1, axis=-1)
    n2 = np.linalg.norm(k2, axis=-1)
    ksum = k1 + k2
    E1 = 0.5 * n1 * n1 + n1
    E2 = 0.5 * n2 * n2 + n2
    E12 = 0.5 * np.sum(ksum * ksum, axis=-1) + n1 + n2
    return 1.0 / E1, 1.0 / E2, 1.0 / E12
