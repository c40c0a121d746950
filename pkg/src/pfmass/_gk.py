"""Gauss-Kronrod 7-15 rule tables and panel helpers.

The 15 Kronrod abscissae embed the 7 Gauss points at the odd indices, so a
single kernel sweep yields both the value and the embedded error estimate.
"""
from __future__ import annotations

import numpy as np

# Kronrod-15 abscissae on [-1, 1].
XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])

# Kronrod-15 weights.
WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])

# Gauss-7 weights aligned with the odd Kronrod indices.
WG = np.zeros(15)
WG[1::2] = [
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
]


def panel_nodes(a: float, b: float) -> np.ndarray:
    return 0.5 * (a + b) + 0.5 * (b - a) * XK


def panel_rule(fx: np.ndarray, a: float, b: float) -> tuple[float, float]:
    """Kronrod value and |Kronrod - Gauss| error for samples at panel_nodes."""
    h = 0.5 * (b - a)
    k = h * float(fx @ WK)
    g = h * float(fx @ WG)
    return k, abs(k - g)
