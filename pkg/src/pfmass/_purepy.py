"""Pure-Python quadrature backend.

Mirrors the compiled extension: a Gauss-Kronrod 7-15 panel engine with
deterministic worst-panel bisection, driving the tensorized 2-D/3-D
integrals.  The innermost axis is vectorized over numpy arrays; the outer
axes are scalar loops, so this backend trades speed for having no build
step.  Values agree with the compiled core to within the reported error
estimates; bit-level output is only guaranteed within one backend.
"""
from __future__ import annotations

import math

import numpy as np

from ._gk import WG, WK, XK
from ._grids import merge_breaks, radial_breakpoints, x_breakpoints

_PI = math.pi


def adapt1d(f, breaks, rel_tol, abs_tol, max_subdiv):
    """Adaptive panel integration of a vectorized integrand.

    f(xs) must return (values, child_errors) arrays for a flat array of
    abscissae.  Panels are bisected worst-first (first index wins ties) and
    the running total is always accumulated in ascending interval order, so
    the result is a deterministic function of the inputs.  Returns
    (value, error, converged).
    """
    nb = len(breaks) - 1
    if nb < 1 or breaks[-1] <= breaks[0]:
        return 0.0, 0.0, True
    aa = np.asarray(breaks[:-1], dtype=float)
    bb = np.asarray(breaks[1:], dtype=float)
    half = 0.5 * (bb - aa)
    nodes = 0.5 * (aa + bb)[:, None] + half[:, None] * XK[None, :]
    vals, cerrs = f(nodes.ravel())
    vals = np.asarray(vals, dtype=float).reshape(nb, 15)
    cerrs = np.asarray(cerrs, dtype=float).reshape(nb, 15)
    k = half * (vals @ WK)
    g = half * (vals @ WG)
    e = np.abs(k - g) + half * (cerrs @ WK)

    a_list = [float(x) for x in aa]
    b_list = [float(x) for x in bb]
    v_list = [float(x) for x in k]
    e_list = [float(x) for x in e]

    splits = 0
    while True:
        total = 0.0
        terr = 0.0
        for v in v_list:
            total += v
        for er in e_list:
            terr += er
        if terr <= max(rel_tol * abs(total), abs_tol):
            return total, terr, True
        if splits >= max_subdiv:
            return total, terr, False
        i = 0
        emax = e_list[0]
        for t in range(1, len(e_list)):
            if e_list[t] > emax:
                i, emax = t, e_list[t]
        a0, b0 = a_list[i], b_list[i]
        m = 0.5 * (a0 + b0)
        if not (a0 < m < b0):
            return total, terr, False
        edges_a = np.array([a0, m])
        edges_b = np.array([m, b0])
        half2 = 0.5 * (edges_b - edges_a)
        nodes2 = 0.5 * (edges_a + edges_b)[:, None] + half2[:, None] * XK[None, :]
        vals2, cerr2 = f(nodes2.ravel())
        vals2 = np.asarray(vals2, dtype=float).reshape(2, 15)
        cerr2 = np.asarray(cerr2, dtype=float).reshape(2, 15)
        k2 = half2 * (vals2 @ WK)
        g2 = half2 * (vals2 @ WG)
        e2 = np.abs(k2 - g2) + half2 * (cerr2 @ WK)
        a_list[i] = a0
        b_list[i] = m
        v_list[i] = float(k2[0])
        e_list[i] = float(e2[0])
        a_list.insert(i + 1, m)
        b_list.insert(i + 1, b0)
        v_list.insert(i + 1, float(k2[1]))
        e_list.insert(i + 1, float(e2[1]))
        splits += 1


def _bk(j, r1, r2, X):
    """Vectorized polar kernel over an r2 array at fixed r1, X."""
    L1 = 1.0 / (0.5 * r1 * r1 + r1)
    L2 = 1.0 / (0.5 * r2 * r2 + r2)
    q = r1 * r1 + 2.0 * r1 * r2 * X + r2 * r2
    Finv = 1.0 / (0.5 * q + r1 + r2)
    if j == 1:
        return -(1.0 + X * X) * _PI * r1 * r2 * (L1 + L2) * Finv
    if j == 2:
        return (1.0 + X * X) * _PI * r1 * r2 * Finv * Finv * Finv * 0.5 * q
    if j == 3:
        return X * (X * X - 1.0) * _PI * r1 * r1 * r2 * r2 * (L1 + L2) * Finv * Finv
    if j == 4:
        return -(1.0 + X * X) * _PI * r1 * r2 * L1 * L2
    if j == 5:
        return (1.0 - X * X) * _PI * r1 * r2 \
            * (r1 * r1 * L1 * L1 + r2 * r2 * L2 * L2) * Finv
    if j == 6:
        return X * (X * X - 1.0) * _PI * r1 * r1 * r2 * r2 * L1 * L2 * Finv
    raise ValueError(f"term index {j} outside 1..6")


def _inner_breaks(base, r1, X, kappa, lam):
    # denominator dip in r2 sits at c = -r1*X - 1 with half-width sqrt(d1)
    c = -r1 * X - 1.0
    if c <= kappa or c >= lam:
        return base
    d1 = r1 * r1 * (1.0 - X * X) + 2.0 * r1 * (1.0 - X) - 1.0
    if d1 <= 0.0:
        return base
    w = math.sqrt(d1)
    return merge_breaks(list(base[1:-1]) + [c - w, c, c + w], kappa, lam)


def bterm(j, lam, kappa, rel_tol, abs_tol, max_subdiv, split_layer):
    """Triple adaptive quadrature of one polar term.

    Axis order X -> r1 -> r2 with tolerances scaled by 0.1 and 0.05 on the
    inner axes.  Returns (value, error, evaluations, converged).
    """
    if lam <= kappa:
        return 0.0, 0.0, 0, True
    count = [0]
    rb = radial_breakpoints(kappa, lam)
    xb = x_breakpoints(lam, split_layer)

    def fmid_factory(X):
        def fmid(r1s):
            n = r1s.size
            vals = np.empty(n)
            errs = np.empty(n)
            for idx in range(n):
                r1 = float(r1s[idx])

                def fleaf(r2s, r1=r1):
                    count[0] += r2s.size
                    return _bk(j, r1, r2s, X), np.zeros(r2s.size)

                ib = _inner_breaks(rb, r1, X, kappa, lam)
                v, e, _ = adapt1d(fleaf, ib, rel_tol * 0.05, abs_tol * 0.05,
                                  max_subdiv)
                vals[idx] = v
                errs[idx] = e
            return vals, errs
        return fmid

    def fout(Xs):
        n = Xs.size
        vals = np.empty(n)
        errs = np.empty(n)
        for idx in range(n):
            X = float(Xs[idx])
            v, e, _ = adapt1d(fmid_factory(X), rb, rel_tol * 0.1,
                              abs_tol * 0.1, max_subdiv)
            vals[idx] = v
            errs[idx] = e
        return vals, errs

    v, e, conv = adapt1d(fout, xb, rel_tol, abs_tol, max_subdiv)
    return v, e, count[0], conv


def _rho(r, X, lam):
    return r * r + 2.0 * lam * r * X + lam * lam + 2.0 * r + 2.0 * lam


def _rho_breaks(kappa, lam, X):
    c = -lam * X - 1.0
    d = lam * lam * (1.0 - X * X) + 2.0 * lam * (1.0 - X) - 1.0
    if kappa < c < lam and d > 0.0:
        return radial_breakpoints(kappa, lam, dip_at=c, dip_width=math.sqrt(d))
    return radial_breakpoints(kappa, lam)


def db2(lam, kappa, rel_tol, abs_tol, max_subdiv):
    """Cutoff derivative of the second polar term:
    8 pi int dX (1+X^2) int dr rho^-3 (r^2 + 2 r lam X + lam^2) r lam.
    """
    if lam <= kappa:
        return 0.0, 0.0, 0, True
    count = [0]
    xb = x_breakpoints(lam, True)

    def fX(Xs):
        n = Xs.size
        vals = np.empty(n)
        errs = np.empty(n)
        for idx in range(n):
            X = float(Xs[idx])

            def fleaf(rs, X=X):
                count[0] += rs.size
                rho = _rho(rs, X, lam)
                val = (rs * rs + 2.0 * rs * lam * X + lam * lam) * rs * lam \
                    / (rho * rho * rho)
                return val, np.zeros(rs.size)

            v, e, _ = adapt1d(fleaf, _rho_breaks(kappa, lam, X),
                              rel_tol * 0.1, abs_tol * 0.1, max_subdiv)
            vals[idx] = (1.0 + X * X) * v
            errs[idx] = (1.0 + X * X) * e
        return vals, errs

    v, e, conv = adapt1d(fX, xb, rel_tol, abs_tol, max_subdiv)
    return 8.0 * _PI * v, 8.0 * _PI * e, count[0], conv


def rho_integrals(lam, rel_tol, abs_tol, max_subdiv):
    """The four raw boundedness integrals over X in [-1,1], r in [0, lam]:
    rho^-1, rho^-2, rho^-1/(r+2), rho^-2 (1-X^2).
    Returns (values, errors, evaluations, converged).
    """
    count = [0]
    xb = x_breakpoints(lam, True)
    vals_out = []
    errs_out = []
    conv_all = True

    for which in range(4):
        def fX(Xs, which=which):
            n = Xs.size
            vals = np.empty(n)
            errs = np.empty(n)
            for idx in range(n):
                X = float(Xs[idx])

                def fleaf(rs, X=X, which=which):
                    count[0] += rs.size
                    rho = _rho(rs, X, lam)
                    if which == 0:
                        val = 1.0 / rho
                    elif which == 1:
                        val = 1.0 / (rho * rho)
                    elif which == 2:
                        val = 1.0 / (rho * (rs + 2.0))
                    else:
                        val = 1.0 / (rho * rho)
                    return val, np.zeros(rs.size)

                v, e, _ = adapt1d(fleaf, _rho_breaks(0.0, lam, X),
                                  rel_tol * 0.1, abs_tol * 0.1, max_subdiv)
                fac = (1.0 - X * X) if which == 3 else 1.0
                vals[idx] = fac * v
                errs[idx] = fac * e
            return vals, errs

        v, e, conv = adapt1d(fX, xb, rel_tol, abs_tol, max_subdiv)
        vals_out.append(v)
        errs_out.append(e)
        conv_all = conv_all and conv

    return tuple(vals_out), tuple(errs_out), count[0], conv_all
