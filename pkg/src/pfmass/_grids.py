"""Breakpoint builders shared by the quadrature backends.

The b-term integrands vary on an O(1) scale near the origin and on an
O(sqrt(r)) scale along the moving denominator dip, while the X dependence
steepens in a layer of width 1/lambda near X = -1.  The builders below seed
the adaptive engine with panel edges matched to those scales; refinement
handles the rest.
"""
from __future__ import annotations

import math

__all__ = [
    "merge_breaks",
    "geometric_ladder",
    "radial_breakpoints",
    "x_breakpoints",
]

_MERGE_EPS = 1e-12


def merge_breaks(points, a: float, b: float) -> list[float]:
    """Sort, clip to [a, b], and drop points closer than 1e-12 * (b - a)."""
    tol = _MERGE_EPS * (b - a)
    out = [a]
    for p in sorted(points):
        if p <= a + tol or p >= b - tol:
            continue
        if p - out[-1] > tol:
            out.append(p)
    out.append(b)
    return out


def geometric_ladder(a: float, b: float, first: float = 0.25, ratio: float = 2.0) -> list[float]:
    """Panel edges from a to b with geometrically growing widths."""
    pts = []
    step = first
    x = a + step
    while x < b:
        pts.append(x)
        step *= ratio
        x += step
    return merge_breaks(pts, a, b)


def radial_breakpoints(kappa: float, lam: float, dip_at: float | None = None,
                       dip_width: float | None = None) -> list[float]:
    """Geometric ladder over [kappa, lam] plus edges bracketing a quadratic
    denominator dip at dip_at with half-width dip_width.
    """
    if lam <= kappa:
        return [kappa, lam]
    pts = geometric_ladder(kappa, lam)[1:-1]
    if dip_at is not None:
        w = dip_width if dip_width is not None else max(1.0, math.sqrt(abs(dip_at)))
        pts.extend((dip_at - w, dip_at, dip_at + w))
    return merge_breaks(pts, kappa, lam)


def x_breakpoints(lam: float, split_boundary_layer: bool = True) -> list[float]:
    """Edges on [-1, 1]: a 1/lambda-graded ladder out of X = -1 plus coarse
    midpoints.  The innermost edge -1 + 1/lambda is controlled by the flag.
    """
    pts = [-0.5, 0.0, 0.5]
    c = 1.0
    while True:
        x = -1.0 + c / lam
        if x >= -0.5:
            break
        if c > 1.0 or split_boundary_layer:
            pts.append(x)
        c *= 4.0
    return merge_breaks(pts, -1.0, 1.0)
