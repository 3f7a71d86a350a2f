"""Fractal supersymmetric quantum-mechanical model of the Riemann zeros."""

__version__ = "0.1.0"

from .analysis import (
    NamedConstants,
    fractal_identity_check,
    phase_shift_correlation,
    rao_spacing_statistic,
    residual_series,
    unfold,
)
from .cbc import (
    CbcReport,
    QuadratureConfig,
    QuadratureError,
    adjust_turning_point,
    cbc_integral,
    cbc_ratio_series,
)
from .fractal import FractalParams, PhiSquared, phi_squared, weierstrass_real
from .optimizer import (
    FitProblem,
    FitResult,
    ObjectiveError,
    OptimizationError,
    differential_evolution,
    fit_phases_fixed_x,
    iterate_two_step,
    objective,
    replay,
)
from .potential import PotentialRangeError, SmoothPotential, dominici_coefficients, dominici_series
from .zeta_zeros import ZeroTable, ZeroTableError, compute_zeros, ingest_zeros, reference_zeros, riemann_siegel_Z
