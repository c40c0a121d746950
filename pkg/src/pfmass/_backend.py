"""Selects the quadrature backend at import time.

The compiled extension is preferred when importable; set PFMASS_BACKEND to
"python" to force the pure fallback or "compiled" to fail loudly when the
extension is missing.
"""
from __future__ import annotations

import os

_requested = os.environ.get("PFMASS_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _purepy as _impl
    BACKEND = "python"
elif _requested in ("", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "PFMASS_BACKEND=compiled but the pfmass._core extension is not built"
            ) from None
        from . import _purepy as _impl
        BACKEND = "python"
else:
    raise ValueError(
        f"PFMASS_BACKEND={_requested!r} not recognized; use 'compiled' or 'python'"
    )

bterm = _impl.bterm
db2 = _impl.db2
rho_integrals = _impl.rho_integrals


def get_backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return BACKEND
