"""Cutoff sweeps and asymptotic verification: power-law fits on the swept
columns, Aitken extrapolation of the scaled second-order coefficient, the
cutoff derivative of the second term, the boundary-layer residual decay, and
the effective-mass / renormalization-flow bookkeeping.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .integrands import B_TERMS, TermId, residual_t
from .kernels import CutoffWindow, a1_closed
from .quadrature import (
    DEFAULT_SPEC_3D,
    IntegralResult,
    QuadratureSpec,
    a2_polar,
    combine_a2,
    integrate_1d,
    integrate_b_term,
    scaled_rho_integrals,
)

__all__ = [
    "SweepRow",
    "SweepTable",
    "PowerLawFit",
    "RatioExtrapolation",
    "MassExpansion",
    "FlowSchedule",
    "sweep",
    "fit_power_law",
    "extrapolate_ratio",
    "db2_dlambda",
    "residual_decay",
    "log_square_ratio",
    "effective_mass",
    "flow_schedule",
]

VALUE_COLUMNS = (
    "b1", "b2", "b3", "b4", "b5", "b6",
    "a2", "a2_sqrt_scaled", "s1", "s2", "s3", "s4", "appB_residual",
)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    kappa: float
    values: dict
    errors: dict
    err_flags: tuple


@dataclass(frozen=True)
class SweepTable:
    rows: tuple

    def __post_init__(self):
        lams = [r.lam for r in self.rows]
        for prev, cur in zip(lams, lams[1:]):
            if not cur > prev:
                raise ValueError(
                    f"sweep rows must have strictly increasing lambda; "
                    f"{cur} follows {prev}"
                )

    def column(self, name: str) -> np.ndarray:
        if name == "lambda":
            return np.array([r.lam for r in self.rows])
        if name == "kappa":
            return np.array([r.kappa for r in self.rows])
        if name not in VALUE_COLUMNS:
            raise KeyError(f"unknown sweep column {name!r}")
        return np.array([r.values[name] for r in self.rows])

    def subset(self, lams) -> "SweepTable":
        """Rows whose lambda is (to 1e-9 relative) in the given list."""
        keep = []
        for r in self.rows:
            if any(abs(r.lam - l) <= 1e-9 * max(1.0, abs(l)) for l in lams):
                keep.append(r)
        return SweepTable(tuple(keep))


def _residual_breaks(lam: float) -> list:
    pts = [-0.5]
    c = 4.0
    while -1.0 + c / lam < -0.5:
        pts.append(-1.0 + c / lam)
        c *= 4.0
    return pts


def _residual_one(w: CutoffWindow, spec: QuadratureSpec) -> IntegralResult:
    lam = w.lam
    inner = QuadratureSpec(rel_tol=spec.rel_tol * 0.1, abs_tol=spec.abs_tol * 0.1,
                           max_subdivisions=spec.max_subdivisions)

    def fX(X: float) -> float:
        return (1.0 + X * X) * (
            residual_t(TermId.T1RES, X, w, inner)
            + residual_t(TermId.T2RES, X, w, inner)
            + residual_t(TermId.T3RES, X, w, inner)
        )

    res = integrate_1d(fX, -1.0 + 1.0 / lam, 0.0, spec,
                       breakpoints=_residual_breaks(lam))
    root = math.sqrt(lam)
    return IntegralResult(root * res.value, root * res.error_estimate,
                          res.evaluations, res.converged)


def residual_decay(windows, spec: QuadratureSpec = DEFAULT_SPEC_3D):
    """Scaled boundary-layer residual sqrt(lam) * int (1+X^2)(t1+t2+t3) dX
    for each window; the sequence decays toward zero as the cutoff grows.
    """
    out = []
    for w in windows:
        if w.lam < 10.0:
            raise ValueError(f"residual decay requires lambda >= 10, got {w.lam}")
        out.append((w.lam, _residual_one(w, spec)))
    return out


def _sweep_row(w: CutoffWindow, spec: QuadratureSpec) -> SweepRow:
    values = {}
    errors = {}
    flags = []

    def record(name: str, res: IntegralResult):
        values[name] = res.value
        errors[name] = res.error_estimate
        if not res.converged:
            flags.append(name)

    bres = [integrate_b_term(j, w, spec) for j in B_TERMS]
    for i, res in enumerate(bres):
        record(f"b{i + 1}", res)
    a2 = combine_a2(bres)
    record("a2", a2)
    if w.lam > 0.0:
        values["a2_sqrt_scaled"] = a2.value / math.sqrt(w.lam)
        errors["a2_sqrt_scaled"] = a2.error_estimate / math.sqrt(w.lam)
    else:
        values["a2_sqrt_scaled"] = math.nan
        errors["a2_sqrt_scaled"] = math.nan
    if w.lam >= 4.0:
        s = scaled_rho_integrals(w.lam, spec)
        for i, res in enumerate(s.results):
            record(f"s{i + 1}", res)
    else:
        for i in range(4):
            values[f"s{i + 1}"] = math.nan
            errors[f"s{i + 1}"] = math.nan
            flags.append(f"s{i + 1}:skipped")
    if w.lam >= 10.0:
        record("appB_residual", _residual_one(w, spec))
    else:
        values["appB_residual"] = math.nan
        errors["appB_residual"] = math.nan
        flags.append("appB_residual:skipped")
    return SweepRow(w.lam, w.kappa, values, errors, tuple(flags))


def sweep(windows, spec: QuadratureSpec = DEFAULT_SPEC_3D, threads: int = 1) -> SweepTable:
    """One row per window, in ascending-lambda order regardless of worker
    scheduling.  A failing row is recorded with NaN values and a row_error
    flag; the sweep continues.
    """
    windows = sorted(windows, key=lambda w: w.lam)
    if not windows:
        raise ValueError("sweep requires at least one window")

    def one(w: CutoffWindow) -> SweepRow:
        try:
            return _sweep_row(w, spec)
        except Exception as exc:  # per-row failure must not kill the sweep
            values = {name: math.nan for name in VALUE_COLUMNS}
            errors = dict(values)
            return SweepRow(w.lam, w.kappa, values, errors,
                            (f"row_error:{type(exc).__name__}",))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, windows))
    else:
        rows = [one(w) for w in windows]
    return SweepTable(tuple(rows))


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line on (log lambda, log |value|)."""

    exponent: float
    amplitude: float
    r_squared: float
    window: tuple
    sign: int = 1


def fit_power_law(table: SweepTable, column: str, window) -> PowerLawFit:
    """Fit value = amplitude * lambda^exponent on the rows inside the window.

    Sign-definite negative columns are fitted in absolute value with the
    sign recorded; mixed signs or zeros are an error naming the row.
    """
    lo, hi = window
    lams = []
    vals = []
    for r in table.rows:
        if lo <= r.lam <= hi:
            lams.append(r.lam)
            vals.append(r.values[column])
    if len(lams) < 4:
        raise ValueError(
            f"power-law fit needs at least 4 rows in window {window}, got {len(lams)}"
        )
    sign = 1 if vals[0] > 0 else -1
    for lam, v in zip(lams, vals):
        if v == 0 or (v > 0) != (sign > 0):
            raise ValueError(
                f"column {column!r} is not sign-definite: value {v} at lambda={lam}"
            )
    x = np.log(np.asarray(lams))
    y = np.log(np.abs(np.asarray(vals)))
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(math.exp(intercept)), r2,
                       (float(lo), float(hi)), sign)


@dataclass(frozen=True)
class RatioExtrapolation:
    """Accelerated limit of the a2/sqrt(lambda) column.  Iterates as the
    (c_estimate, spread) pair; accelerated is False when the tail
    oscillated and the raw last value was returned instead.
    """

    c_estimate: float
    spread: float
    accelerated: bool = True

    def __iter__(self):
        return iter((self.c_estimate, self.spread))


def extrapolate_ratio(table: SweepTable) -> RatioExtrapolation:
    """Aitken delta-squared on the last three a2/sqrt(lambda) values."""
    col = table.column("a2_sqrt_scaled")
    if len(col) < 3:
        raise ValueError(f"extrapolation needs at least 3 rows, got {len(col)}")
    x0, x1, x2 = (float(v) for v in col[-3:])
    d1 = x1 - x0
    d2 = x2 - x1
    if d1 == 0.0 and d2 == 0.0:
        return RatioExtrapolation(x2, 0.0)
    if d1 * d2 < 0.0:
        return RatioExtrapolation(x2, abs(d2), accelerated=False)
    denom = d2 - d1
    if denom == 0.0:
        return RatioExtrapolation(x2, abs(d2), accelerated=False)
    acc = x2 - d2 * d2 / denom
    return RatioExtrapolation(float(acc), abs(float(acc) - x2))


def db2_dlambda(lam: float, kappa: float,
                spec: QuadratureSpec = DEFAULT_SPEC_3D) -> IntegralResult:
    """Cutoff derivative of the second polar term by direct quadrature of
    8 pi int dX (1+X^2) rho^-3 (r^2 + 2 r lam X + lam^2) r lam.
    """
    if not lam > kappa:
        raise ValueError(f"lambda must exceed kappa, got lambda={lam}, kappa={kappa}")
    value, err, neval, conv = _backend.db2(lam, kappa, spec.rel_tol, spec.abs_tol,
                                           spec.max_subdivisions)
    return IntegralResult(value, err, neval, conv)


def log_square_ratio(table: SweepTable):
    """Per-row ratio a2 / (a1^2 / 2); the targeted alternative hypothesis
    (a squared-logarithm second-order coefficient) would make this tend to
    a constant instead of diverging.
    """
    out = []
    for r in table.rows:
        a1 = a1_closed(CutoffWindow(r.lam, r.kappa))
        out.append((r.lam, r.values["a2"] / (0.5 * a1 * a1)))
    return out


@dataclass(frozen=True)
class MassExpansion:
    alpha: float
    a1: float
    a2: float
    m_over_meff: float
    meff_over_m: float


def effective_mass(alpha: float, w: CutoffWindow,
                   spec: QuadratureSpec = DEFAULT_SPEC_3D,
                   a2_result: IntegralResult | None = None) -> MassExpansion:
    """Both directions of the second-order mass ratio: 1 - alpha a1 - alpha^2 a2
    and its truncated series inverse 1 + alpha a1 + alpha^2 (a1^2 + a2).
    Pass a precomputed a2_result to skip the quadrature.
    """
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    a1 = a1_closed(w)
    res = a2_result if a2_result is not None else a2_polar(w, spec)
    a2 = res.value
    return MassExpansion(
        alpha=alpha,
        a1=a1,
        a2=a2,
        m_over_meff=1.0 - alpha * a1 - alpha * alpha * a2,
        meff_over_m=1.0 + alpha * a1 + alpha * alpha * (a1 * a1 + a2),
    )


@dataclass(frozen=True)
class FlowSchedule:
    bare_mass: float
    b1: float

    def __iter__(self):
        return iter((self.bare_mass, self.b1))


def flow_schedule(fit: PowerLawFit, m_star: float, lam: float) -> FlowSchedule:
    """Bare mass solving b0 (lam/m)^gamma m = m_star, i.e.
    m = lam^{-gamma/(1-gamma)} b1^{1/(1-gamma)} with b1 = m_star/b0.
    Requires 0 < gamma < 1; outside that range the flow is not
    renormalizable in this scheme.
    """
    gamma = fit.exponent
    if not 0.0 < gamma < 1.0:
        raise ValueError(
            f"gamma={gamma} outside (0, 1): flow not renormalizable in this scheme"
        )
    if not m_star > 0.0:
        raise ValueError(f"m_star must be positive, got {m_star}")
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    b1 = m_star / fit.amplitude
    bare = lam ** (-gamma / (1.0 - gamma)) * b1 ** (1.0 / (1.0 - gamma))
    return FlowSchedule(bare, b1)
