"""Effective-mass renormalization coefficients of the spinless
nonrelativistic QED model with sharp momentum cutoffs.

The package computes the order-alpha and order-alpha^2 coefficients of the
mass ratio by deterministic adaptive quadrature, cross-checks the polar
representation against an independent Cartesian quasi-Monte-Carlo path, and
sweeps the ultraviolet cutoff to measure how the second-order coefficient
grows (square root of the cutoff, not squared logarithm).
"""

from ._backend import get_backend
from .asymptotics import (
    FlowSchedule,
    MassExpansion,
    PowerLawFit,
    RatioExtrapolation,
    SweepRow,
    SweepTable,
    db2_dlambda,
    effective_mass,
    extrapolate_ratio,
    fit_power_law,
    flow_schedule,
    log_square_ratio,
    residual_decay,
    sweep,
)
from .integrands import (
    B_TERMS,
    E_TERMS,
    T_TERMS,
    PoleProximityError,
    TermId,
    arctan_bracket,
    b_kernel,
    e_term_kernel,
    e_term_sum,
    k_polynomial,
    lower_bound_functions,
    residual_t,
    t_r,
    tr_positive_check,
)
from .kernels import (
    CartesianPair,
    CutoffWindow,
    PolarPoint,
    a1_closed,
    cartesian_denominators,
    polar_denominators,
    projector_contractions,
    rho_and_delta,
    transverse_projector,
)
from .quadrature import (
    A2_PREFACTOR,
    DEFAULT_SPEC_1D,
    DEFAULT_SPEC_3D,
    IntegralResult,
    QuadratureSpec,
    ScaledIntegrals,
    a1_radial,
    a2_cartesian_qmc,
    a2_polar,
    combine_a2,
    integrate_1d,
    integrate_b_term,
    scaled_rho_integrals,
)

__version__ = "0.1.0"
