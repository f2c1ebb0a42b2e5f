"""Simulation, exact covariances and least-squares unit-root inference for a
unilateral spatial autoregression on triangular lattices."""

__version__ = "0.1.0"

from .errors import InvalidArgumentError, SingularSystemError, UnsupportedRegimeError
from .rng import NoiseKind, replicate_seed
from .lattice import (
    FlipMode,
    ModelParams,
    NoiseSpec,
    Stability,
    TriangularField,
    cell_count,
    ma_representation,
    sign_flip,
    simulate_triangle,
)
from .kernels import binomial_kernel_prob, kernel_weight
from .covariance import (
    LatticePoint,
    ScaledPoint,
    check_pmf_bounds,
    conv_binomial_pmf,
    covariance_exact,
    covariance_growth_scan,
    expected_s_sums,
    quadform_cov,
    z_alpha_limit,
)
from .estimation import (
    EstimateResult,
    Regime,
    asymptotic_constants,
    lse_canonical,
    lse_coefficients,
    phi,
    psi,
    s_sums,
    score_vector,
    unit_root_statistic,
)
from .montecarlo import StudyConfig, StudyReport, ks_normal_test, run_study, variance_convergence

__all__ = [name for name in dir() if not name.startswith("_")]
