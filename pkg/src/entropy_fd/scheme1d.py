"""Entropy-dissipating semi-discretisation on the one-dimensional torus.

Pipeline for ``du/dt = -(J_{i+1/2} - J_{i-1/2}) / h``::

    u -> v = s'(u) -> (xi1^2, xi2) -> (A, B) -> J -> du/dt

``J[i]`` always stores the interface value ``J_{i+1/2}``.  Because the flux
is assembled as ``A_x - v B_x`` and the ``xi`` are chosen so that the discrete
product rule closes, ``h sum v_i du_i/dt`` equals the closed-form
production ``-h sum ubar^(alpha+beta)/(alpha-1)^2 P(xi1, xi2)`` exactly
(up to rounding), which is what the tests check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .coeffs import (
    EntropySpec,
    LambdaSet,
    ModelParams,
    PolySpec,
    coercivity_constant,
    lambdas_for,
    poly_spec,
    verify_flux_identification,
)
from .errors import NonpositiveState, ZeroEntropyVariable
from .grid import TorusGrid

_V_FLOOR = 1e-300


class Variant(enum.Enum):
    CENTRAL = "central"
    NONCENTRAL = "noncentral"


class AverageRule(enum.Enum):
    IDENTITY = "identity"
    ARITHMETIC = "arith"
    GEOMETRIC = "geom"


class Alpha1Form(enum.Enum):
    """Scaling of the Shannon-entropy scheme.

    ``CONSISTENT`` weights ``xi2`` by ``u_i`` and ``B_i`` by an extra ``u_i``
    so that the scheme approximates the PDE; ``LITERAL`` keeps the unweighted
    quantities.  Both dissipate the entropy with the same production form.
    """

    CONSISTENT = "consistent"
    LITERAL = "literal"


@dataclass(frozen=True)
class SchemeConfig:
    entropy: EntropySpec
    model: ModelParams
    lambdas: LambdaSet
    variant: Variant = Variant.CENTRAL
    average: AverageRule = AverageRule.IDENTITY
    alpha1_form: Alpha1Form = Alpha1Form.CONSISTENT

    def __post_init__(self):
        if self.entropy.is_shannon and self.variant is Variant.NONCENTRAL:
            raise ValueError("the noncentral flux is only defined for alpha != 1")
        scale = 1.0 + max(abs(x) for x in self.lambdas)
        res = verify_flux_identification(self.lambdas, self.entropy, self.model)
        if res > 1e-10 * scale**2:
            raise ValueError(f"lambdas do not match (entropy, model): residual {res:.3e}")

    @classmethod
    def build(
        cls,
        alpha: float,
        model: ModelParams,
        *,
        lambda4: float | None = None,
        variant: Variant | str = Variant.CENTRAL,
        average: AverageRule | str = AverageRule.IDENTITY,
        alpha1_form: Alpha1Form | str = Alpha1Form.CONSISTENT,
    ) -> "SchemeConfig":
        """Config with the optimal ``lambda4`` unless one is given."""
        entropy = EntropySpec(float(alpha))
        return cls(
            entropy,
            model,
            lambdas_for(entropy, model, lambda4),
            Variant(variant),
            AverageRule(average),
            Alpha1Form(alpha1_form),
        )

    @property
    def poly(self) -> PolySpec:
        return poly_spec(self.entropy, self.lambdas)

    @property
    def weight_exponent(self) -> float:
        """Power of ``ubar`` multiplying the production form."""
        if self.entropy.is_shannon:
            return self.model.beta + 1.0
        return self.entropy.alpha + self.model.beta

    @property
    def production_scale(self) -> float:
        """``1/(alpha-1)^2`` for ``alpha != 1`` and ``1`` for the Shannon case."""
        if self.entropy.is_shannon:
            return 1.0
        return 1.0 / (self.entropy.alpha - 1.0) ** 2


@dataclass
class EntropyVariables:
    v: np.ndarray
    w: np.ndarray | None = None


class XiPair(NamedTuple):
    xi1sq: np.ndarray
    xi2: np.ndarray


def check_positive(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if not np.all(u > 0) or not np.all(np.isfinite(u)):
        bad = int(np.argmin(np.where(np.isfinite(u), u, -np.inf)))
        raise NonpositiveState(f"state must be positive and finite; u[{bad}] = {u.flat[bad]!r}")
    return u


def entropy_density(u: np.ndarray, alpha: float) -> np.ndarray:
    """``s_alpha(u)``; the Shannon density is ``u (log u - 1)``."""
    u = check_positive(u)
    if alpha == 0:
        return -np.log(u)
    if alpha == 1:
        return u * (np.log(u) - 1.0)
    return np.exp(alpha * np.log(u)) / (alpha * (alpha - 1.0))


def entropy_variable(u: np.ndarray, alpha: float) -> np.ndarray:
    """``s_alpha'(u)``."""
    u = check_positive(u)
    if alpha == 1:
        return np.log(u)
    return np.exp((alpha - 1.0) * np.log(u)) / (alpha - 1.0)


def power(u: np.ndarray, p: float) -> np.ndarray:
    return np.exp(p * np.log(u))


def average(u: np.ndarray, rule: AverageRule) -> np.ndarray:
    """Local average ``ubar`` over a node and its nearest neighbours (any dimension)."""
    rule = AverageRule(rule)
    if rule is AverageRule.IDENTITY:
        return u
    nbrs = [np.roll(u, s, axis=ax) for ax in range(u.ndim) for s in (-1, 1)]
    if rule is AverageRule.ARITHMETIC:
        return (u + sum(nbrs)) / (1 + len(nbrs))
    logs = np.log(u) + sum(np.log(n) for n in nbrs)
    return np.exp(logs / (1 + len(nbrs)))


def entropy_variables(u: np.ndarray, entropy: EntropySpec) -> EntropyVariables:
    u = check_positive(u)
    if entropy.is_shannon:
        return EntropyVariables(v=np.log(u), w=-1.0 / u)
    return EntropyVariables(v=entropy_variable(u, entropy.alpha))


def _guard(v: np.ndarray) -> None:
    if np.any(np.abs(v) < _V_FLOOR):
        raise ZeroEntropyVariable("entropy variable vanishes; xi ratios are undefined")


def xi_central(ev: EntropyVariables, grid: TorusGrid) -> XiPair:
    v = ev.v
    _guard(v)
    dp = np.roll(v, -1) - v
    dm = v - np.roll(v, 1)
    h2 = grid.h**2
    xi2 = (dp - dm) / (v * h2)
    xi1sq = (dp * dp + dm * dm) / (2.0 * v * v * h2)
    return XiPair(xi1sq, xi2)


def xi_noncentral(ev: EntropyVariables, grid: TorusGrid) -> XiPair:
    v = ev.v
    _guard(v)
    dp = np.roll(v, -1) - v
    dm = v - np.roll(v, 1)
    h2 = grid.h**2
    return XiPair(dm * dm / (v * v * h2), (dp - dm) / (v * h2))


def xi_alpha1(ev: EntropyVariables, grid: TorusGrid, form: Alpha1Form = Alpha1Form.CONSISTENT) -> XiPair:
    """Shannon-entropy ratios built from ``v = log u`` and ``w = -1/u``.

    ``xi1^2`` is not a square here and may be negative on rough data.
    """
    v, w = ev.v, ev.w
    if w is None:
        raise ValueError("xi_alpha1 needs the auxiliary variable w = -1/u")
    h2 = grid.h**2
    g = 0.5 * (np.roll(v, -1) - v) * (np.roll(w, -1) + w)  # ~ v_x w at i+1/2
    d = (g - np.roll(g, 1)) / h2
    xi2 = -d / w if Alpha1Form(form) is Alpha1Form.CONSISTENT else d
    xi1sq = xi2 + (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / h2
    return XiPair(xi1sq, xi2)


def product_rule_residual(v: np.ndarray, xi: XiPair, grid: TorusGrid, variant: Variant) -> float:
    """Max relative pointwise defect of the discrete product rule.

    Central: ``v^2 (xi2 + xi1^2) = (v_{i+1}^2 - 2 v_i^2 + v_{i-1}^2) / (2 h^2)``.
    Noncentral: ``v^2 (xi2 + xi1^2) = d^-(v d^+ v)``.
    """
    vp, vm = np.roll(v, -1), np.roll(v, 1)
    h2 = grid.h**2
    lhs = v * v * (xi.xi2 + xi.xi1sq)
    if Variant(variant) is Variant.CENTRAL:
        rhs = (vp * vp - 2.0 * v * v + vm * vm) / (2.0 * h2)
    else:
        rhs = (v * (vp - v) - vm * (v - vm)) / h2
    scale = (vp * vp + 2.0 * v * v + vm * vm) / h2
    return float(np.max(np.abs(lhs - rhs) / scale))


def compute_xi(ev: EntropyVariables, config: SchemeConfig, grid: TorusGrid) -> XiPair:
    if config.entropy.is_shannon:
        return xi_alpha1(ev, grid, config.alpha1_form)
    if config.variant is Variant.NONCENTRAL:
        return xi_noncentral(ev, grid)
    return xi_central(ev, grid)


def assemble_AB(u, ev: EntropyVariables, xi: XiPair, config: SchemeConfig):
    """``A``, ``B`` for ``alpha != 1`` in the ``1/v`` form."""
    l1, l2, l3, l4 = config.lambdas
    v = ev.v
    _guard(v)
    weight = power(average(u, config.average), config.weight_exponent) * config.production_scale
    A = weight / v * (l1 * xi.xi2 + l2 * xi.xi1sq)
    B = weight / (v * v) * (l3 * xi.xi2 + l4 * xi.xi1sq)
    return A, B


def assemble_AB_alpha1(u, ev: EntropyVariables, xi: XiPair, config: SchemeConfig):
    l1, l2, l3, l4 = config.lambdas
    u = check_positive(u)
    weight = power(average(u, config.average), config.model.beta + 1.0)
    A = -weight * (l1 * xi.xi2 + l2 * xi.xi1sq)
    if config.alpha1_form is Alpha1Form.CONSISTENT:
        weight = weight * u
    B = weight * (l3 * xi.xi2 + l4 * xi.xi1sq)
    return A, B


def flux(A, B, ev: EntropyVariables, config: SchemeConfig, grid: TorusGrid) -> np.ndarray:
    """Interface fluxes; ``J[i]`` is ``J_{i+1/2}``."""
    dA = np.roll(A, -1) - A
    dB = np.roll(B, -1) - B
    if config.entropy.is_shannon:
        mult = 0.5 * (np.roll(ev.w, -1) + ev.w)
    elif config.variant is Variant.NONCENTRAL:
        mult = ev.v
    else:
        mult = 0.5 * (np.roll(ev.v, -1) + ev.v)
    return (dA - mult * dB) / grid.h


def _pipeline(u, config: SchemeConfig, grid: TorusGrid):
    u = check_positive(u)
    ev = entropy_variables(u, config.entropy)
    xi = compute_xi(ev, config, grid)
    if config.entropy.is_shannon:
        A, B = assemble_AB_alpha1(u, ev, xi, config)
    else:
        A, B = assemble_AB(u, ev, xi, config)
    return u, ev, xi, A, B


def rhs(u: np.ndarray, config: SchemeConfig, grid: TorusGrid) -> np.ndarray:
    u, ev, xi, A, B = _pipeline(u, config, grid)
    J = flux(A, B, ev, config, grid)
    return -(J - np.roll(J, 1)) / grid.h


def entropy_production(u: np.ndarray, config: SchemeConfig, grid: TorusGrid) -> float:
    """``dS/dt`` evaluated directly as ``h sum s'(u_i) (du/dt)_i``."""
    v = entropy_variable(u, config.entropy.alpha)
    return grid.h * float(np.sum(v * rhs(u, config, grid)))


def entropy_production_closed_form(u: np.ndarray, config: SchemeConfig, grid: TorusGrid) -> float:
    u = check_positive(u)
    ev = entropy_variables(u, config.entropy)
    xi = compute_xi(ev, config, grid)
    weight = power(average(u, config.average), config.weight_exponent)
    p = config.poly.from_squares(xi.xi1sq, xi.xi2)
    return -grid.h * config.production_scale * float(np.sum(weight * p))


def dissipation_functional(u: np.ndarray, config: SchemeConfig, grid: TorusGrid) -> float:
    """``h sum ubar^(alpha+beta) (xi2^2 + xi1^4)``."""
    u = check_positive(u)
    ev = entropy_variables(u, config.entropy)
    xi = compute_xi(ev, config, grid)
    weight = power(average(u, config.average), config.weight_exponent)
    return grid.h * float(np.sum(weight * (xi.xi2**2 + xi.xi1sq**2)))


class Scheme1D:
    """Callable right-hand side bundling a config with its grid."""

    #: offsets coupled by one evaluation of the right-hand side
    stencil = [(k,) for k in range(-2, 3)]

    def __init__(self, config: SchemeConfig, grid: TorusGrid):
        if grid.ndim != 1:
            raise ValueError("Scheme1D needs a one-dimensional grid")
        self.config = config
        self.grid = grid

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return rhs(u, self.config, self.grid)

    @property
    def alpha(self) -> float:
        return self.config.entropy.alpha

    def entropy_production(self, u) -> float:
        return entropy_production(u, self.config, self.grid)

    def closed_form_production(self, u) -> float:
        return entropy_production_closed_form(u, self.config, self.grid)

    def dissipation(self, u) -> float:
        return dissipation_functional(u, self.config, self.grid)

    def coercivity(self) -> float:
        """Constant ``c`` of ``dS/dt + c * dissipation <= 0``."""
        return coercivity_constant(self.config.poly) * self.config.production_scale
