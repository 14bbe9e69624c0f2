"""Unbiased minimum-variance linear filters for scalar systems driven by
fractional Gaussian noise."""
from ._jit import BACKEND
from .covariance import (
    CovarianceReport,
    ErrorLinearMap,
    cost,
    covariance_report,
    error_covariance_closed,
    error_covariance_oracle,
    error_linear_map,
    transition_product,
)
from .model import (
    FilterGain,
    SystemSpec,
    ValidationError,
    WeightSpec,
    derive_filter_coefficients,
    run_filter,
    validate_system,
)
from .noise import NoiseModel, autocovariance, covariance_matrix, sample_fgn
from .optimizer import (
    NotConvergedError,
    OptimizationResult,
    OptimizerOptions,
    greedy_white_noise_gain,
    minimize,
    multi_start,
    stationarity_certificate,
)
from .twostep import example_system, solve_two_step_example
from .variation import (
    GradientReport,
    fd_gradient,
    gateaux_K,
    gradient,
    gradient_report,
    product_derivative,
    q_terms,
    stationarity_residual,
)

__version__ = "0.1.0"
