import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pfmass import CutoffWindow, QuadratureSpec, a2_cartesian_qmc, a2_polar, sweep
from pfmass.quadrature import DEFAULT_SPEC_3D

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


@pytest.fixture
def w51():
    return CutoffWindow(5.0, 1.0)


@pytest.fixture
def tight_1d():
    # abs_tol keeps near-zero integrals from spinning on the relative target
    return QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)


CROSSCHECK_WINDOWS = (
    CutoffWindow(5.0, 1.0),
    CutoffWindow(10.0, 1.0),
    CutoffWindow(20.0, 2.0),
    CutoffWindow(40.0, 4.0),
)


@pytest.fixture(scope="session")
def crosscheck_data():
    """Cartesian-QMC and polar values on the four standard windows, timed."""
    start = time.perf_counter()
    pairs = [(w, a2_cartesian_qmc(w), a2_polar(w)) for w in CROSSCHECK_WINDOWS]
    return pairs, time.perf_counter() - start


@pytest.fixture(scope="session")
def acceptance_sweep():
    """Nine-point geometric sweep 1e2..1e6 at kappa=0; decade points included."""
    grid = np.geomspace(1e2, 1e6, 9)
    windows = [CutoffWindow(float(lam), 0.0) for lam in grid]
    start = time.perf_counter()
    table = sweep(windows, DEFAULT_SPEC_3D, threads=4)
    return table, time.perf_counter() - start
