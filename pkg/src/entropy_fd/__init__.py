"""Entropy-dissipating finite-difference schemes for fourth-order parabolic equations."""

from .coeffs import (
    EntropySpec,
    LambdaSet,
    ModelParams,
    PolySpec,
    PolyVariant,
    admissibility_K,
    coercivity_constant,
    k_constant,
    lambda4_optimal,
    lambda_2d,
    lambda_alpha0,
    lambda_alpha1,
    lambda_general,
    lambdas_for,
    nonneg_margin,
    poly_spec,
    verify_flux_identification,
)
from .diagnostics import TrajectoryRecord, convergence_order, decay_rate, discrete_entropy, l2_error, mass
from .errors import (
    ConfigError,
    DegenerateWindow,
    EntropyFDError,
    IncompatibleGrids,
    InvalidAlpha,
    MalformedHeader,
    NonpositiveState,
    NotNonnegative,
    PositivityLoss,
    SingularDenominator,
    StepSizeUnderflow,
    TruncatedData,
    UnknownPreset,
    ZeroEntropyVariable,
)
from .grid import TorusGrid
from .integrator import JacobianKind, Method, SolverConfig, integrate
from .scheme1d import AverageRule, Scheme1D, SchemeConfig, Variant
from .scheme2d import Scheme2D, Scheme2DConfig

__version__ = "0.1.0"

__all__ = [
    "admissibility_K",
    "AverageRule",
    "coercivity_constant",
    "ConfigError",
    "convergence_order",
    "decay_rate",
    "DegenerateWindow",
    "discrete_entropy",
    "EntropyFDError",
    "EntropySpec",
    "IncompatibleGrids",
    "integrate",
    "InvalidAlpha",
    "JacobianKind",
    "k_constant",
    "l2_error",
    "lambda4_optimal",
    "lambda_2d",
    "lambda_alpha0",
    "lambda_alpha1",
    "lambda_general",
    "lambdas_for",
    "LambdaSet",
    "MalformedHeader",
    "mass",
    "Method",
    "ModelParams",
    "nonneg_margin",
    "NonpositiveState",
    "NotNonnegative",
    "poly_spec",
    "PolySpec",
    "PolyVariant",
    "PositivityLoss",
    "Scheme1D",
    "Scheme2D",
    "Scheme2DConfig",
    "SchemeConfig",
    "SingularDenominator",
    "SolverConfig",
    "StepSizeUnderflow",
    "TorusGrid",
    "TrajectoryRecord",
    "TruncatedData",
    "UnknownPreset",
    "Variant",
    "verify_flux_identification",
    "ZeroEntropyVariable",
]
