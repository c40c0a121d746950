"""Integrands: the six polar second-order kernels, the five Cartesian
matrix-element terms, the boundary-layer residual terms, and the lower-bound
machinery for the square-root growth of the second-order coefficient.

Every kernel returns the full integrand including measure weights and angular
polynomials, so integrators only supply the domain and the tolerance.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import CartesianPair, CutoffWindow, PolarPoint, projector_contractions, rho_and_delta

__all__ = [
    "TermId",
    "B_TERMS",
    "E_TERMS",
    "T_TERMS",
    "PoleProximityError",
    "b_kernel",
    "e_term_kernel",
    "e_term_sum",
    "residual_t",
    "t_r",
    "tr_positive_check",
    "arctan_bracket",
    "lower_bound_functions",
    "LowerBoundValues",
]

_INV_TWO_PI_CUBED = (2.0 * math.pi) ** -3


class TermId(Enum):
    B1 = "B1"
    B2 = "B2"
    B3 = "B3"
    B4 = "B4"
    B5 = "B5"
    B6 = "B6"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    E4 = "E4"
    E5 = "E5"
    T1RES = "T1res"
    T2RES = "T2res"
    T3RES = "T3res"


B_TERMS = (TermId.B1, TermId.B2, TermId.B3, TermId.B4, TermId.B5, TermId.B6)
E_TERMS = (TermId.E1, TermId.E2, TermId.E3, TermId.E4, TermId.E5)
T_TERMS = (TermId.T1RES, TermId.T2RES, TermId.T3RES)


class PoleProximityError(ValueError):
    """A rational lower-bound function was evaluated too close to a real pole."""


def b_kernel(j: TermId, p: PolarPoint):
    """Polar integrand of the j-th second-order term, measure included.

    The radial measure weight is pi*r1*r2 for B1, B2, B4, B5 and
    pi*r1^2*r2^2 for B3, B6; the angular polynomial is (1+X^2) for
    B1, B2, B4, X(X^2-1) for B3, B6, and (1-X^2) for B5.  B1 and B4
    carry the leading minus sign.
    """
    r1 = np.asarray(p.r1, dtype=float)
    r2 = np.asarray(p.r2, dtype=float)
    X = np.asarray(p.X, dtype=float)
    L1 = 1.0 / (0.5 * r1 * r1 + r1)
    L2 = 1.0 / (0.5 * r2 * r2 + r2)
    q12 = r1 * r1 + 2.0 * r1 * r2 * X + r2 * r2
    F12inv = 1.0 / (0.5 * q12 + r1 + r2)
    mlight = math.pi * r1 * r2
    mheavy = mlight * r1 * r2
    if j is TermId.B1:
        val = -(1.0 + X * X) * mlight * (L1 + L2) * F12inv
    elif j is TermId.B2:
        val = (1.0 + X * X) * mlight * F12inv ** 3 * 0.5 * q12
    elif j is TermId.B3:
        val = X * (X * X - 1.0) * mheavy * (L1 + L2) * F12inv ** 2
    elif j is TermId.B4:
        val = -(1.0 + X * X) * mlight * L1 * L2
    elif j is TermId.B5:
        val = (1.0 - X * X) * mlight * (r1 * r1 * L1 * L1 + r2 * r2 * L2 * L2) * F12inv
    elif j is TermId.B6:
        val = X * (X * X - 1.0) * mheavy * L1 * L2 * F12inv
    else:
        raise ValueError(f"{j} is not a polar term")
    return float(val) if val.ndim == 0 else val


def e_term_kernel(j: TermId, c: CartesianPair, path: str = "matrix"):
    """Cartesian integrand of the j-th matrix-element term, including the
    per-photon weights w_j = (2 pi)^-3 / (2 |k_j|).

    E1 and E4 are negative; E2 carries the (1/2)^2 * 2 factor of its
    quadratic origin; E5 is the two-line sum of squared single-photon
    denominators and the mixed bilinear piece.
    """
    k1 = np.asarray(c.k1, dtype=float)
    k2 = np.asarray(c.k2, dtype=float)
    n1 = np.linalg.norm(k1, axis=-1)
    n2 = np.linalg.norm(k2, axis=-1)
    trQQ, bilin, quad1, quad2 = projector_contractions(k1, k2, path=path)
    E1inv = 1.0 / (0.5 * n1 * n1 + n1)
    E2inv = 1.0 / (0.5 * n2 * n2 + n2)
    ksum = k1 + k2
    ks2 = np.sum(ksum * ksum, axis=-1)
    E12inv = 1.0 / (0.5 * ks2 + n1 + n2)
    w12 = (_INV_TWO_PI_CUBED / (2.0 * n1)) * (_INV_TWO_PI_CUBED / (2.0 * n2))
    if j is TermId.E1:
        val = -(E1inv + E2inv) * E12inv * trQQ
    elif j is TermId.E2:
        val = 0.25 * E12inv ** 3 * ks2 * 2.0 * trQQ
    elif j is TermId.E3:
        val = (E1inv + E2inv) * E12inv ** 2 * bilin
    elif j is TermId.E4:
        val = -E1inv * E2inv * trQQ
    elif j is TermId.E5:
        val = E12inv * (E1inv ** 2 * quad1 + E2inv ** 2 * quad2) \
            + E12inv * E1inv * E2inv * bilin
    else:
        raise ValueError(f"{j} is not a Cartesian term")
    out = w12 * val
    return float(out) if np.ndim(out) == 0 else out


def e_term_sum(c: CartesianPair, path: str = "matrix"):
    """Sum of the five Cartesian terms at one (pair of) shell point(s)."""
    total = e_term_kernel(TermId.E1, c, path)
    for j in E_TERMS[1:]:
        total = total + e_term_kernel(j, c, path)
    return total


# ---------------------------------------------------------------------------
# Boundary-layer residual terms.

def _bdiff(f, w: CutoffWindow) -> float:
    return f(w.lam) - f(w.kappa)


def _int_rho_pow2_closed(X: float, w: CutoffWindow) -> float:
    """Closed form of the radial integral of rho^-2 over the window."""
    lam = w.lam
    _, d = rho_and_delta(0.0, X, lam)
    sd = math.sqrt(d)

    def term(r: float) -> float:
        rho, _ = rho_and_delta(r, X, lam)
        u = r + lam * X + 1.0
        return u / (2.0 * d * rho) + math.atan(u / sd) / (2.0 * d * sd)

    return _bdiff(term, w)


def _int_rho_pow3_closed(X: float, w: CutoffWindow) -> float:
    """Closed form of the radial integral of rho^-3 over the window."""
    lam = w.lam
    _, d = rho_and_delta(0.0, X, lam)
    sd = math.sqrt(d)

    def term(r: float) -> float:
        rho, _ = rho_and_delta(r, X, lam)
        u = r + lam * X + 1.0
        return (u / (4.0 * d * rho * rho)
                + 0.375 * u / (d * d * rho)
                + 0.375 * math.atan(u / sd) / (d * d * sd))

    return _bdiff(term, w)


def _int_r_rho_pow3_closed(X: float, w: CutoffWindow) -> float:
    """Closed form of the radial integral of r * rho^-3 over the window."""
    lam = w.lam

    def quarter(r: float) -> float:
        rho, _ = rho_and_delta(r, X, lam)
        return -0.25 / (rho * rho)

    return _bdiff(quarter, w) - (lam * X + 1.0) * _int_rho_pow3_closed(X, w)


_RHO_CLOSED = {
    "rho2": _int_rho_pow2_closed,
    "rho3": _int_rho_pow3_closed,
    "r_rho3": _int_r_rho_pow3_closed,
}


def _rho_power_integrals(X: float, w: CutoffWindow, spec=None, method: str = "quadrature"):
    """Radial integrals (rho^-2, rho^-3, r rho^-3) over [kappa, lam] at fixed X."""
    if w.empty:
        return 0.0, 0.0, 0.0
    if method == "closed":
        return (_int_rho_pow2_closed(X, w),
                _int_rho_pow3_closed(X, w),
                _int_r_rho_pow3_closed(X, w))
    from . import quadrature as _q
    from ._grids import radial_breakpoints

    spec = spec if spec is not None else _q.QuadratureSpec()
    lam = w.lam
    _, d = rho_and_delta(0.0, X, lam)
    breaks = radial_breakpoints(w.kappa, lam, dip_at=-lam * X - 1.0,
                                dip_width=math.sqrt(max(d, 1e-30)))

    def run(f):
        res = _q.integrate_1d(f, w.kappa, lam, spec, breakpoints=breaks)
        return res.value

    i2 = run(lambda r: 1.0 / rho_and_delta(r, X, lam)[0] ** 2)
    i3 = run(lambda r: 1.0 / rho_and_delta(r, X, lam)[0] ** 3)
    ir3 = run(lambda r: r / rho_and_delta(r, X, lam)[0] ** 3)
    return i2, i3, ir3


def residual_t(j: TermId, X: float, w: CutoffWindow, spec=None,
               method: str = "quadrature") -> float:
    """Value of the j-th residual term at fixed X.

    T1res and the quadrature piece of T2res are radial integrals of rho
    powers; the remaining pieces are boundary differences.  method="closed"
    swaps the quadratures for the arctan antiderivatives.
    """
    lam = w.lam
    _, d = rho_and_delta(0.0, X, lam)
    if d <= 0.0:
        raise ValueError(f"delta = {d} <= 0 at X = {X}: outside the validity region")
    if j is TermId.T3RES:
        def term(r: float) -> float:
            rho, _ = rho_and_delta(r, X, lam)
            return (r + lam * X + 1.0) / (4.0 * d) / (rho * rho)

        return lam ** 3 * 2.0 * (2.0 * X + 1.0) * (1.0 - X) * _bdiff(term, w)
    i2, i3, ir3 = _rho_power_integrals(X, w, spec, method)
    if j is TermId.T1RES:
        return -2.0 * lam * i2 + 4.0 * lam * ir3 + 2.0 * lam * lam * i3
    if j is TermId.T2RES:
        return lam * (-0.5) * _bdiff(lambda r: 1.0 / rho_and_delta(r, X, lam)[0], w) \
            - lam * i2
    raise ValueError(f"{j} is not a residual term")


# ---------------------------------------------------------------------------
# Lower-bound machinery.

def t_r(r, X, lam):
    """Radial integrand of the cutoff derivative of the square-root term:
    rho^-3 (r^2 + 2 r lam X + lam^2) r lam.  Nonnegative everywhere since
    r^2 + 2 r lam X + lam^2 = (r + lam X)^2 + lam^2 (1 - X^2).
    """
    rho, _ = rho_and_delta(r, X, lam)
    r = np.asarray(r, dtype=float)
    return (r * r + 2.0 * r * lam * np.asarray(X) + lam * lam) * r * lam / rho ** 3


def tr_positive_check(w: CutoffWindow, num_r: int = 100, num_x: int = 100) -> bool:
    """Sample t_r on a (r, X) grid over the window and the nonpositive-X
    boundary layer; raises if any sample is negative.
    """
    lam = w.lam
    rs = np.linspace(w.kappa, lam, num_r)
    xs = np.linspace(-1.0 + 1.0 / lam, 0.0, num_x)
    vals = t_r(rs[:, None], xs[None, :], lam)
    if np.any(vals < 0.0):
        i, k = np.unravel_index(int(np.argmin(vals)), vals.shape)
        raise ValueError(
            f"t_r negative at r={rs[i]}, X={xs[k]}: {vals[i, k]}"
        )
    return True


def arctan_bracket(y: float, w: CutoffWindow) -> float:
    """Boundary difference of arctan((r - lam y + 1)/sqrt(delta)) across the
    window, evaluated at X = -y.  Positive for 0 <= y <= 1.
    """
    lam = w.lam
    _, d = rho_and_delta(0.0, -y, lam)
    sd = math.sqrt(d)
    return math.atan(((1.0 - y) * lam + 1.0) / sd) \
        - math.atan((w.kappa - lam * y + 1.0) / sd)


@dataclass(frozen=True)
class LowerBoundValues:
    aL: float
    bL: float
    Kpoly: float
    TR_positive_check: object

    def __iter__(self):
        return iter((self.aL, self.bL, self.Kpoly, self.TR_positive_check))


def _b_lower(y: float, lam: float) -> float:
    num = y + (2.0 * lam + 3.0) / (2.0 * lam + 4.0)
    scale = (2.0 * lam + 3.0) * (2.0 * lam - 1.0) / (4.0 * lam * lam)
    den = (y - 1.0 / (2.0 * lam)) ** 2 - scale
    if abs(den) < 1e-6 * scale:
        raise PoleProximityError(
            f"lower-bound denominator {den} within 1e-6 of its scale {scale} at y={y}"
        )
    return (3.0 / lam) * (1.0 + 2.0 / lam) * num / den


def k_polynomial(y: float, w: CutoffWindow) -> float:
    """Cubic-in-lam polynomial controlling the sign of the square-root
    boundary bracket; includes the kappa and kappa^2 lines.
    """
    lam, kap = w.lam, w.kappa
    return ((-2.0 * y * y + y + 1.0) * lam ** 3 + (1.0 + 4.0 * y) * lam ** 2
            - 2.0 * lam
            + kap * ((y * y - 2.0) * lam ** 2 + (-2.0 * y - 2.0) * lam + 1.0)
            + kap * kap * ((-y + 1.0) * lam + 1.0))


def lower_bound_functions(y: float, w: CutoffWindow) -> LowerBoundValues:
    """Evaluate the lower-bound ingredients at y: the affine-plus-rational
    a(y) = 2y + 6/lam + b(y), the rational b(y), the K polynomial, and a
    grid check procedure for the nonnegativity of t_r.

    b has real poles just outside y = 1; proximity below 1e-6 of the
    denominator scale raises PoleProximityError rather than returning a
    silently huge value.
    """
    bL = _b_lower(y, w.lam)
    aL = 2.0 * y + 6.0 / w.lam + bL
    return LowerBoundValues(
        aL=aL,
        bL=bL,
        Kpoly=k_polynomial(y, w),
        TR_positive_check=functools.partial(tr_positive_check, w),
    )
