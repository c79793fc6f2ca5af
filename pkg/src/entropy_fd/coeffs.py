"""Scalar coefficient machinery for the entropy-dissipating schemes.

The flux of

    u_t = -J_x,   J = u^beta u_xxx + a u^(beta-1) u_xx u_x + b u^(beta-2) u_x^3

is rewritten as ``J = A_x - v B_x`` with ``v = s_alpha'(u)``.  ``A`` and ``B``
are linear in the ratios ``xi2 = v_xx / v`` and ``xi1^2 = (v_x / v)^2`` with
coefficients ``(lambda1, .., lambda4)``; ``lambda4`` is free.  The entropy
production is then ``-u^(alpha+beta)/(alpha-1)^2 * P(xi1, xi2)`` with the
quartic form ``P = c22 xi2^2 + c21 xi2 xi1^2 + c11 xi1^4`` handled here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidAlpha, NotNonnegative, SingularDenominator

IDENTIFICATION_TOL = 1e-10
_ALPHA_ONE_TOL = 1e-12
_DENOM_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Coefficients ``(a, b, beta)`` of the fourth-order equation."""

    a: float
    b: float
    beta: float

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")

    @classmethod
    def dlss(cls) -> "ModelParams":
        return cls(a=-2.0, b=1.0, beta=0.0)

    @classmethod
    def thin_film(cls, beta: float) -> "ModelParams":
        return cls(a=0.0, b=0.0, beta=float(beta))


class EntropyKind(enum.Enum):
    RENYI = "renyi"
    LOGARITHMIC = "logarithmic"
    SHANNON = "shannon"


@dataclass(frozen=True)
class EntropySpec:
    """Entropy index ``alpha``; the kind is derived, so it can never disagree."""

    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")

    @property
    def kind(self) -> EntropyKind:
        if self.alpha == 0:
            return EntropyKind.LOGARITHMIC
        if self.alpha == 1:
            return EntropyKind.SHANNON
        return EntropyKind.RENYI

    @property
    def is_shannon(self) -> bool:
        return abs(self.alpha - 1.0) < _ALPHA_ONE_TOL


class LambdaSet(NamedTuple):
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float


class PolyVariant(enum.Enum):
    P = "P"
    P1 = "P1"
    P0 = "P0"


@dataclass(frozen=True)
class PolySpec:
    """The quartic form ``c22 xi2^2 + c21 xi2 xi1^2 + c11 xi1^4``."""

    variant: PolyVariant
    c22: float
    c21: float
    c11: float

    def __call__(self, xi1, xi2):
        return self.from_squares(xi1 * xi1, xi2)

    def from_squares(self, xi1sq, xi2):
        """Evaluate with ``xi1^2`` supplied directly (it may be negative)."""
        return self.c22 * xi2 * xi2 + self.c21 * xi2 * xi1sq + self.c11 * xi1sq * xi1sq


def _check_not_alpha_one(alpha: float) -> None:
    if abs(alpha - 1.0) < _ALPHA_ONE_TOL:
        raise InvalidAlpha("alpha = 1 needs lambda_alpha1 (Shannon entropy formulation)")


def lambda_general(entropy: EntropySpec, model: ModelParams, lambda4: float) -> LambdaSet:
    """General solution of the flux identification system for ``alpha != 1``.

    Raises
    ------
    InvalidAlpha
        For ``alpha == 1``.
    SingularDenominator
        When ``beta - 2 alpha + 3`` vanishes.
    """
    al, a, b, be = entropy.alpha, model.a, model.b, model.beta
    _check_not_alpha_one(al)
    d = be - 2.0 * al + 3.0
    if abs(d) < _DENOM_TOL:
        raise SingularDenominator(f"beta - 2*alpha + 3 = {d} (alpha={al}, beta={be})")
    am1 = al - 1.0
    l1 = (-2 * al**2 + (be + 5) * al + a * be - be**2 - a - 2 * b - 3) / (am1 * d) + 2 * am1 / d * lambda4
    l2 = (2 * al**2 - (a + 7) * al + 2 * a + b + 6) / (am1 * d) + (be - 3 * al + 4) / d * lambda4
    # denominator (alpha-1)(beta-2alpha+3): the (1-alpha) variant breaks lambda1 - lambda3 = 1
    l3 = ((a + 1) * be - be**2 - a - 2 * b) / (am1 * d) + 2 * am1 / d * lambda4
    return LambdaSet(l1, l2, l3, float(lambda4))


def lambda_alpha0(model: ModelParams, lambda4: float) -> LambdaSet:
    """Closed-form lambdas of the ``alpha = 0`` identification system."""
    a, b, be = model.a, model.b, model.beta
    d = be + 3.0
    l1 = (be**2 - a * be + a + 2 * b + 3) / d - 2.0 / d * lambda4
    l2 = -(2 * a + b + 6) / d + (be + 4) / d * lambda4
    l3 = (be**2 - a * be - be + a + 2 * b) / d - 2.0 / d * lambda4
    return LambdaSet(l1, l2, l3, float(lambda4))


def lambda_alpha1(model: ModelParams, lambda4: float) -> LambdaSet:
    """Lambdas for the Shannon entropy.

    The flux is written as ``A_x - w B_x`` with ``w = -1/u``, which is the
    logarithmic-entropy formulation, so the ``alpha = 0`` system applies.
    """
    return lambda_alpha0(model, lambda4)


def lambda4_optimal(entropy: EntropySpec, model: ModelParams) -> float:
    """The ``lambda4`` maximising the nonnegativity margin of the production form."""
    al, a, b, be = entropy.alpha, model.a, model.b, model.beta
    if entropy.is_shannon:
        return (be**2 - (3 * a + 14) * be + 9 * (a + b) + 3) / 9.0
    num = -2 * al**2 + (-3 * a + 8 * be + 3) * al - 3 * a * be + be**2 + 9 * (a + b) - 15 * be
    return num / (9.0 * (al - 1.0) ** 2)


def lambdas_for(entropy: EntropySpec, model: ModelParams, lambda4: float | None = None) -> LambdaSet:
    """Lambda set for ``(entropy, model)``; ``lambda4`` defaults to the optimum."""
    if lambda4 is None:
        lambda4 = lambda4_optimal(entropy, model)
    if entropy.is_shannon:
        return lambda_alpha1(model, lambda4)
    return lambda_general(entropy, model, lambda4)


def admissibility_K(entropy: EntropySpec, model: ModelParams) -> float:
    al, a, b, be = entropy.alpha, model.a, model.b, model.beta
    return -2 * al**2 + (3 * a - 4 * be + 9) * al - 2 * be**2 + (3 * a + 9) * be - 9 * (a + b + 1)


def poly_spec(entropy: EntropySpec, lambdas: LambdaSet, variant: PolyVariant | None = None) -> PolySpec:
    """Coefficients of the entropy-production form.

    The variant follows from ``alpha`` (``P1`` for Shannon, ``P`` otherwise);
    pass ``PolyVariant.P0`` for the two-dimensional thin-film scheme.
    """
    l1, l2, l3, l4 = lambdas
    if variant is None:
        variant = PolyVariant.P1 if entropy.is_shannon else PolyVariant.P
    if variant is PolyVariant.P1:
        return PolySpec(variant, l1 - l3, -l1 + l2 - l4, -l2)
    return PolySpec(variant, l1 - l3, l2 - l3 - l4, -l4)


def nonneg_margin(spec: PolySpec) -> float:
    """``4 c11 - c21^2``; with ``c22 = 1`` the form is nonnegative iff this is >= 0."""
    return 4.0 * spec.c11 - spec.c21**2


def _quadratic_optimum(c22: float, c21: float, c11: float) -> float:
    # largest c with (c22-c) t^2 + c21 t s + (c11-c) s^2 >= 0 on R^2; smaller root of
    # c^2 - (c22+c11) c + (c22 c11 - c21^2/4) = 0, written to avoid cancellation
    disc_root = math.hypot(c22 - c11, c21)
    prod = c22 * c11 - 0.25 * c21 * c21
    larger = 0.5 * ((c22 + c11) + disc_root)
    if larger <= 0:
        return 0.0
    c = prod / larger
    return min(max(c, 0.0), min(c22, c11))


def coercivity_constant(spec: PolySpec) -> float:
    """Largest ``c >= 0`` with ``spec(xi1, xi2) >= c (xi2^2 + xi1^4)`` on R^2.

    Raises
    ------
    NotNonnegative
        If the form takes negative values.
    """
    margin = nonneg_margin(spec)
    scale = 1.0 + spec.c21**2 + abs(spec.c11)
    if margin < -1e-12 * scale or min(spec.c11, spec.c22) < -1e-12 * scale:
        raise NotNonnegative(f"production form is indefinite (margin {margin:.3e})")
    if margin <= 1e-12 * scale:
        return 0.0
    return _quadratic_optimum(spec.c22, spec.c21, spec.c11)


def k_constant(alpha: float) -> float:
    """Coercivity of ``t^2 + 2(alpha-2) t s + (2 alpha^2 - 6 alpha + 5) s^2``.

    Converts the bound in ``(v_xx/v, (v_x/v)^2)`` into one in
    ``(u_xx/u, (u_x/u)^2)``; zero only at ``alpha = 1``.  The Shannon case
    works in ``w = -1/u`` and therefore uses ``k_constant(0)``.
    """
    return _quadratic_optimum(1.0, 2.0 * (alpha - 2.0), 2 * alpha**2 - 6 * alpha + 5)


def identification_residuals(lambdas: LambdaSet, alpha: float, model: ModelParams) -> tuple[float, float, float]:
    """Residuals of the ``u_xxx``, ``u_xx u_x`` and ``u_x^3`` coefficient equations."""
    l1, l2, l3, l4 = lambdas
    al, be = alpha, model.beta
    r1 = (l1 - l3) - 1.0
    ra = (2 * l1 + 2 * l2 - l3 - 2 * l4) * al + (l1 - l3) * be - 4 * l1 - 2 * l2 + 3 * l3 + 2 * l4 - model.a
    rb = (
        (l3 + l4) * al**2
        + (l1 + l2 - l3 - l4) * al * be
        - (l1 + l2 + 2 * l3 + l4) * al
        + (-2 * l1 - l2 + 2 * l3 + l4) * be
        + 2 * l1
        + l2
        - model.b
    )
    return r1, ra, rb


def verify_flux_identification(lambdas: LambdaSet, entropy: EntropySpec, model: ModelParams) -> float:
    """Max absolute residual of the identification system.

    For the Shannon entropy the ``alpha = 0`` system is checked, since that
    case reuses the logarithmic formulation.
    """
    alpha = 0.0 if entropy.is_shannon else entropy.alpha
    return max(abs(r) for r in identification_residuals(lambdas, alpha, model))


def lambda_2d(beta: float) -> LambdaSet:
    """Unique lambdas of the scalar-variable flux for the multi-d thin-film equation."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return LambdaSet(beta + 1.0, -2.0 * (beta + 1.0), float(beta), -2.0 * beta)
