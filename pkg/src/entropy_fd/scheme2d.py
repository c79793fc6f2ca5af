"""Multi-dimensional thin-film scheme with the logarithmic entropy.

    du/dt = -div^+ J,   J = grad^- A - v grad^- B,   v = -1/u

with scalar ratios ``xi2 = lap(v)/v`` and ``xi1^2 = |grad^+ v|^2 / v^2``.
The lambdas are fixed by the identification (no free parameter), and the
production form is ``xi2^2 - (beta+2) xi2 xi1^2 + 2 beta xi1^4``, which is
nonnegative only for ``beta = 2``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coeffs import EntropySpec, LambdaSet, PolySpec, PolyVariant, lambda_2d, nonneg_margin, poly_spec
from .errors import ZeroEntropyVariable
from .grid import TorusGrid
from .scheme1d import AverageRule, XiPair, average, check_positive, power

LOGARITHMIC = EntropySpec(0.0)


class NoLyapunovGuarantee(UserWarning):
    pass


@dataclass(frozen=True)
class Scheme2DConfig:
    beta: float
    grid: TorusGrid
    average: AverageRule = AverageRule.IDENTITY
    allow_no_guarantee: bool = False
    lambdas: LambdaSet = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", lambda_2d(self.beta))
        object.__setattr__(self, "average", AverageRule(self.average))
        if self.grid.ndim < 2:
            raise ValueError("Scheme2DConfig needs a grid with d >= 2")
        if not self.guaranteed:
            if not self.allow_no_guarantee:
                raise ValueError(
                    f"beta={self.beta}: the entropy is only a Lyapunov functional for beta=2; "
                    "pass allow_no_guarantee=True to run anyway"
                )
            warnings.warn(f"beta={self.beta} has no Lyapunov guarantee", NoLyapunovGuarantee, stacklevel=3)

    @property
    def guaranteed(self) -> bool:
        return self.beta == 2.0

    @property
    def poly(self) -> PolySpec:
        return poly_spec(LOGARITHMIC, self.lambdas, PolyVariant.P0)

    @property
    def margin(self) -> float:
        """Equals ``-(beta - 2)^2``."""
        return nonneg_margin(self.poly)


def xi_2d(v: np.ndarray, grid: TorusGrid) -> XiPair:
    if np.any(np.abs(v) < 1e-300):
        raise ZeroEntropyVariable("entropy variable vanishes")
    grad = grid.gradient_fwd(v)
    xi1sq = sum(g * g for g in grad) / (v * v)
    xi2 = grid.laplacian(v) / v
    return XiPair(xi1sq, xi2)


def product_rule_residual_2d(v: np.ndarray, grid: TorusGrid) -> float:
    """Max relative defect of ``div^+(v grad^- v) = v lap(v) + |grad^+ v|^2``."""
    xi = xi_2d(v, grid)
    lhs = v * v * (xi.xi2 + xi.xi1sq)
    rhs = grid.divergence([v * g for g in grid.gradient_bwd(v)])
    scale = (2 * grid.ndim * v * v + sum(f * f for f in grid.neighbours(v))) / grid.h**2
    return float(np.max(np.abs(lhs - rhs) / scale))


def assemble_AB_2d(u, v, xi: XiPair, config: Scheme2DConfig):
    l1, l2, l3, l4 = config.lambdas
    u = check_positive(u)
    weight = power(average(u, config.average), config.beta)
    A = weight / v * (l1 * xi.xi2 + l2 * xi.xi1sq)
    B = weight / (v * v) * (l3 * xi.xi2 + l4 * xi.xi1sq)
    return A, B


def rhs_2d(u: np.ndarray, config: Scheme2DConfig) -> np.ndarray:
    grid = config.grid
    u = check_positive(grid.check(u))
    v = -1.0 / u
    A, B = assemble_AB_2d(u, v, xi_2d(v, grid), config)
    J = [grid.backward_diff(A, mu) - v * grid.backward_diff(B, mu) for mu in range(grid.ndim)]
    return -grid.divergence(J)


def entropy_production_2d(u: np.ndarray, config: Scheme2DConfig) -> float:
    """Closed form ``-h^d sum ubar^beta P0(xi1, xi2)``."""
    grid = config.grid
    u = check_positive(grid.check(u))
    v = -1.0 / u
    xi = xi_2d(v, grid)
    weight = power(average(u, config.average), config.beta)
    return -grid.cell_volume * float(np.sum(weight * config.poly.from_squares(xi.xi1sq, xi.xi2)))


def entropy_production_2d_direct(u: np.ndarray, config: Scheme2DConfig) -> float:
    """``h^d sum s_0'(u_i) (du/dt)_i``."""
    u = check_positive(u)
    return config.grid.cell_volume * float(np.sum(-1.0 / u * rhs_2d(u, config)))


def dissipation_2d(u: np.ndarray, config: Scheme2DConfig) -> float:
    grid = config.grid
    u = check_positive(u)
    xi = xi_2d(-1.0 / u, grid)
    weight = power(average(u, config.average), config.beta)
    return grid.cell_volume * float(np.sum(weight * (xi.xi2**2 + xi.xi1sq**2)))


def _diamond(radius: int, d: int):
    return [o for o in itertools.product(range(-radius, radius + 1), repeat=d) if sum(map(abs, o)) <= radius]


class Scheme2D:
    """Callable right-hand side for the multi-dimensional thin-film scheme."""

    alpha = 0.0

    def __init__(self, config: Scheme2DConfig):
        self.config = config
        self.grid = config.grid
        # rhs_i reaches A, B at i and i +- e_mu, each of which reads a 5-point star
        self.stencil = _diamond(2, self.grid.ndim)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return rhs_2d(u, self.config)

    def entropy_production(self, u) -> float:
        return entropy_production_2d_direct(u, self.config)

    def closed_form_production(self, u) -> float:
        return entropy_production_2d(u, self.config)

    def dissipation(self, u) -> float:
        return dissipation_2d(u, self.config)
