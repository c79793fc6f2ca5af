"""Uniform periodic grids and their difference operators.

Fields are plain ``numpy`` arrays shaped like ``grid.dims``; axis ``mu`` of
the array is axis ``mu`` of the torus.  Node ``i`` sits at ``x = i * h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TorusGrid:
    dims: tuple[int, ...]
    h: float

    def __post_init__(self):
        dims = tuple(int(n) for n in np.atleast_1d(self.dims))
        object.__setattr__(self, "dims", dims)
        if not dims or any(n < 3 for n in dims):
            raise ValueError(f"every axis needs at least 3 points, got {dims}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")

    @classmethod
    def unit(cls, n: int, d: int = 1) -> "TorusGrid":
        """``n^d`` points on the unit torus."""
        return cls((n,) * d, 1.0 / n)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_volume(self) -> float:
        return self.h**self.ndim

    @property
    def measure(self) -> float:
        return float(np.prod([n * self.h for n in self.dims]))

    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinates, one array per axis (``indexing='ij'``)."""
        axes = [np.arange(n) * self.h for n in self.dims]
        if self.ndim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.dims:
            raise ValueError(f"field shape {f.shape} does not match grid {self.dims}")
        return f

    def integrate(self, f: np.ndarray) -> float:
        return self.cell_volume * float(np.sum(f))

    # operators

    def forward_diff(self, f: np.ndarray, axis: int = 0) -> np.ndarray:
        return (np.roll(f, -1, axis=axis) - f) / self.h

    def backward_diff(self, f: np.ndarray, axis: int = 0) -> np.ndarray:
        return (f - np.roll(f, 1, axis=axis)) / self.h

    def gradient_fwd(self, f: np.ndarray) -> list[np.ndarray]:
        return [self.forward_diff(f, mu) for mu in range(self.ndim)]

    def gradient_bwd(self, f: np.ndarray) -> list[np.ndarray]:
        return [self.backward_diff(f, mu) for mu in range(self.ndim)]

    def divergence(self, F) -> np.ndarray:
        """Forward divergence ``sum_mu d_mu^+ F_mu``."""
        if len(F) != self.ndim:
            raise ValueError(f"vector field has {len(F)} components, grid has {self.ndim} axes")
        return sum(self.forward_diff(F[mu], mu) for mu in range(self.ndim))

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """``div^+ grad^-``, the standard (2d+1)-point Laplacian."""
        out = np.zeros_like(f, dtype=float)
        for mu in range(self.ndim):
            # differences first, so constants give exact zeros
            out = out + (np.roll(f, -1, axis=mu) - f) - (f - np.roll(f, 1, axis=mu))
        return out / self.h**2

    def neighbours(self, f: np.ndarray):
        """Yield the ``2d`` nearest-neighbour shifts of ``f``."""
        for mu in range(self.ndim):
            yield np.roll(f, -1, axis=mu)
            yield np.roll(f, 1, axis=mu)
