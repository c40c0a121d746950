"""Public quadrature API: deterministic adaptive panel integration for the
1-D and polar 3-D integrals, the scaled 2-D boundedness integrals, and the
quasi-Monte-Carlo engine for the 6-D Cartesian cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._grids import merge_breaks
from ._purepy import adapt1d
from .integrands import B_TERMS, TermId, e_term_sum
from .kernels import CartesianPair, CutoffWindow

__all__ = [
    "QuadratureSpec",
    "IntegralResult",
    "DEFAULT_SPEC_1D",
    "DEFAULT_SPEC_3D",
    "A2_PREFACTOR",
    "integrate_1d",
    "integrate_b_term",
    "a1_radial",
    "a2_polar",
    "combine_a2",
    "a2_cartesian_qmc",
    "ScaledIntegrals",
    "scaled_rho_integrals",
]

# (4 pi)^2 / (2 pi)^6 * (2/3)
A2_PREFACTOR = 1.0 / (6.0 * math.pi ** 4)

_B_INDEX = {t: i + 1 for i, t in enumerate(B_TERMS)}


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets shared by all integration routines."""

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 1000
    split_boundary_layer: bool = True
    qmc_samples: int = 2 ** 16
    qmc_seed: int = 20260815

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0.0:
            raise ValueError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(
                f"max_subdivisions must be at least 1, got {self.max_subdivisions}"
            )
        if self.qmc_samples < 2:
            raise ValueError(f"qmc_samples must be at least 2, got {self.qmc_samples}")


@dataclass(frozen=True)
class IntegralResult:
    """Value with an honest error estimate.  converged asserts that
    error_estimate <= max(rel_tol * |value|, abs_tol) held at return time.
    """

    value: float
    error_estimate: float
    evaluations: int
    converged: bool


DEFAULT_SPEC_1D = QuadratureSpec()
DEFAULT_SPEC_3D = QuadratureSpec(rel_tol=1e-6)


def integrate_1d(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC_1D,
                 breakpoints=None) -> IntegralResult:
    """Adaptive Gauss-Kronrod integration of a scalar function on [a, b].

    Bisects the worst panel first with a deterministic tie-break, so equal
    inputs give bit-identical results.  A non-finite sample aborts with an
    error naming the abscissa.
    """
    if not a < b:
        raise ValueError(f"integration bounds must satisfy a < b, got a={a}, b={b}")
    count = [0]

    def fvec(xs):
        out = np.empty(xs.size)
        for i in range(xs.size):
            x = float(xs[i])
            v = float(f(x))
            if not math.isfinite(v):
                raise ValueError(
                    f"integrand returned non-finite value {v!r} at abscissa x={x!r}"
                )
            out[i] = v
        count[0] += xs.size
        return out, np.zeros(xs.size)

    breaks = merge_breaks(breakpoints or [], a, b)
    value, err, conv = adapt1d(fvec, breaks, spec.rel_tol, spec.abs_tol,
                               spec.max_subdivisions)
    return IntegralResult(value, err, count[0], conv)


def integrate_b_term(j: TermId, w: CutoffWindow,
                     spec: QuadratureSpec = DEFAULT_SPEC_3D) -> IntegralResult:
    """One polar term b_j over the window, via the active backend.

    Tensorized adaptive quadrature with X outermost; the window's boundary
    layer in X is pre-split when spec.split_boundary_layer is set.
    """
    if isinstance(j, int):
        if not 1 <= j <= 6:
            raise ValueError(f"term index must be in 1..6, got {j}")
        j = B_TERMS[j - 1]
    if j not in _B_INDEX:
        raise ValueError(f"{j} is not one of the six polar terms")
    value, err, neval, conv = _backend.bterm(
        _B_INDEX[j], w.lam, w.kappa, spec.rel_tol, spec.abs_tol,
        spec.max_subdivisions, spec.split_boundary_layer,
    )
    return IntegralResult(value, err, neval, conv)


def a1_radial(w: CutoffWindow, spec: QuadratureSpec = DEFAULT_SPEC_1D) -> IntegralResult:
    """First-order coefficient by 1-D quadrature of (8/3pi) / (r+2),
    the independent path checked against a1_closed.
    """
    if w.empty:
        return IntegralResult(0.0, 0.0, 0, True)
    pref = 8.0 / (3.0 * math.pi)
    res = integrate_1d(lambda r: pref / (r + 2.0), w.kappa, w.lam, spec)
    return res


def combine_a2(term_results) -> IntegralResult:
    """Prefactored sum of the six term results with root-sum-square error
    propagation; non-convergence of any term flags the sum.
    """
    term_results = list(term_results)
    if len(term_results) != 6:
        raise ValueError(f"expected 6 term results, got {len(term_results)}")
    total = 0.0
    sq = 0.0
    neval = 0
    conv = True
    for r in term_results:
        total += r.value
        sq += r.error_estimate * r.error_estimate
        neval += r.evaluations
        conv = conv and r.converged
    return IntegralResult(A2_PREFACTOR * total, A2_PREFACTOR * math.sqrt(sq),
                          neval, conv)


def a2_polar(w: CutoffWindow, spec: QuadratureSpec = DEFAULT_SPEC_3D) -> IntegralResult:
    """Second-order coefficient from the six polar terms."""
    return combine_a2(integrate_b_term(j, w, spec) for j in B_TERMS)


def _shell_points(u, lam: float, kappa: float):
    """Map uniform triples to shell momenta with the exact r^2 dr dOmega
    density (inverse-CDF radial sampling)."""
    r = np.cbrt(kappa ** 3 + (lam ** 3 - kappa ** 3) * u[:, 0])
    ct = 2.0 * u[:, 1] - 1.0
    st = np.sqrt(np.maximum(0.0, 1.0 - ct * ct))
    phi = 2.0 * math.pi * u[:, 2]
    return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * ct], axis=-1)


def a2_cartesian_qmc(w: CutoffWindow,
                     spec: QuadratureSpec = DEFAULT_SPEC_3D) -> IntegralResult:
    """Independent Cartesian evaluation: (4 pi)^2 (2/3) times the 6-D shell
    integral of the five matrix-element terms, by scrambled low-discrepancy
    sampling with 16 replicates.  The projector algebra runs through the
    matrix path, not the closed trace identities, so this is a genuinely
    independent pipeline from the polar terms.
    """
    if w.empty:
        return IntegralResult(0.0, 0.0, 0, True)
    from scipy.stats import qmc

    lam, kappa = w.lam, w.kappa
    n_rep = 16
    seeds = np.random.SeedSequence(spec.qmc_seed).spawn(n_rep)
    shell_volume = 4.0 * math.pi * (lam ** 3 - kappa ** 3) / 3.0
    means = np.empty(n_rep)
    n = spec.qmc_samples
    m = int(n).bit_length() - 1
    exact_pow2 = (1 << m) == n
    for i in range(n_rep):
        sob = qmc.Sobol(d=6, scramble=True, seed=np.random.default_rng(seeds[i]))
        u = sob.random_base2(m=m) if exact_pow2 else sob.random(n)
        k1 = _shell_points(u[:, :3], lam, kappa)
        k2 = _shell_points(u[:, 3:], lam, kappa)
        vals = e_term_sum(CartesianPair(k1, k2), path="matrix")
        means[i] = shell_volume * shell_volume * float(np.mean(vals))
    pref = (4.0 * math.pi) ** 2 * (2.0 / 3.0)
    value = pref * float(np.mean(means))
    spread = pref * float(np.std(means, ddof=1)) / math.sqrt(n_rep)
    conv = spread <= max(spec.rel_tol * abs(value), spec.abs_tol)
    return IntegralResult(value, spread, n_rep * u.shape[0] if n_rep else 0, conv)


@dataclass(frozen=True)
class ScaledIntegrals:
    """The four scaled boundedness integrals S1..S4 plus their underlying
    results (value = scaled S, error scaled identically)."""

    S1: float
    S2: float
    S3: float
    S4: float
    results: tuple

    def __iter__(self):
        return iter((self.S1, self.S2, self.S3, self.S4))


def scaled_rho_integrals(lam: float,
                         spec: QuadratureSpec = DEFAULT_SPEC_3D) -> ScaledIntegrals:
    """S1 = lam*I1, S2 = lam^{5/2}*I2, S3 = (lam^2/log lam)*I3, S4 = lam^3*I4
    for the four raw integrals of 1/rho, 1/rho^2, 1/(rho(r+2)), (1-X^2)/rho^2
    over X in [-1, 1], r in [0, lam].  Bounded sequences in lam certify the
    quadratic denominator's growth rate.
    """
    if lam < 4.0:
        raise ValueError(f"lambda must be at least 4, got {lam}")
    vals, errs, neval, conv = _backend.rho_integrals(
        lam, spec.rel_tol, spec.abs_tol, spec.max_subdivisions
    )
    scales = (lam, lam ** 2.5, lam ** 2 / math.log(lam), lam ** 3)
    results = tuple(
        IntegralResult(s * v, s * e, neval, conv)
        for s, v, e in zip(scales, vals, errs)
    )
    return ScaledIntegrals(results[0].value, results[1].value,
                           results[2].value, results[3].value, results)
