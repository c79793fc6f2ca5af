"""Scalar functionals, trajectory records and error/rate estimators."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateWindow, IncompatibleGrids, NonpositiveState
from .grid import TorusGrid
from .scheme1d import entropy_density

CSV_FORMAT = "%.17g"
SERIES_COLUMNS = ("t", "mass", "entropy", "entropy_production", "dissipation", "min_u", "max_u")


def discrete_entropy(u: np.ndarray, alpha: float, grid: TorusGrid) -> float:
    """``h^d sum s_alpha(u_i)``."""
    return grid.integrate(entropy_density(grid.check(u), alpha))


def mass(u: np.ndarray, grid: TorusGrid) -> float:
    return grid.integrate(grid.check(u))


def steady_entropy(total_mass: float, alpha: float, grid: TorusGrid) -> float:
    """Entropy of the constant state carrying ``total_mass``."""
    mean = total_mass / grid.measure
    return grid.measure * float(entropy_density(np.array([mean]), alpha)[0])


@dataclass
class TrajectoryRecord:
    """Scalar time series of a run plus optional state snapshots.

    Use :meth:`observer` to get a callable for :func:`integrator.integrate`.
    """

    alpha: float
    grid: TorusGrid
    times: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    entropy: list[float] = field(default_factory=list)
    entropy_production: list[float] = field(default_factory=list)
    dissipation: list[float] = field(default_factory=list)
    min_u: list[float] = field(default_factory=list)
    max_u: list[float] = field(default_factory=list)
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def append(self, t: float, u: np.ndarray, scheme=None) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError(f"times must increase strictly ({t} after {self.times[-1]})")
        lo = float(np.min(u))
        if not lo > 0:
            raise NonpositiveState(f"min u = {lo:.3e} at t={t}")
        self.times.append(float(t))
        self.mass.append(mass(u, self.grid))
        self.entropy.append(discrete_entropy(u, self.alpha, self.grid))
        if scheme is None:
            self.entropy_production.append(np.nan)
            self.dissipation.append(np.nan)
        else:
            self.entropy_production.append(scheme.entropy_production(u))
            self.dissipation.append(scheme.dissipation(u))
        self.min_u.append(lo)
        self.max_u.append(float(np.max(u)))

    def observer(self, scheme=None):
        def observe(t, u):
            self.append(t, u, scheme)

        return observe

    def columns(self) -> dict[str, np.ndarray]:
        return {name: np.asarray(getattr(self, "times" if name == "t" else name)) for name in SERIES_COLUMNS}

    def steady_entropy(self) -> float:
        return steady_entropy(self.mass[0], self.alpha, self.grid)

    def write_csv(self, path) -> None:
        cols = self.columns()
        table = np.column_stack([cols[c] for c in SERIES_COLUMNS])
        np.savetxt(path, table, delimiter=",", header=",".join(SERIES_COLUMNS), comments="", fmt=CSV_FORMAT)


def write_snapshot(path, u: np.ndarray, grid: TorusGrid) -> None:
    """CSV with columns ``x[, y], u`` in C order."""
    coords = [c.ravel() for c in grid.coords()]
    names = ["x", "y", "z"][: grid.ndim] if grid.ndim <= 3 else [f"x{k}" for k in range(grid.ndim)]
    table = np.column_stack(coords + [np.asarray(u).ravel()])
    np.savetxt(path, table, delimiter=",", header=",".join(names + ["u"]), comments="", fmt=CSV_FORMAT)


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return {name: body[:, k] for k, name in enumerate(header)}


def decay_rate(
    record: TrajectoryRecord | None = None,
    window: tuple[float, float] = (0.0, np.inf),
    *,
    times: Sequence[float] | None = None,
    entropy: Sequence[float] | None = None,
    s_inf: float | None = None,
) -> float:
    """Exponential rate ``r`` in ``S(t) - S_inf ~ C exp(-r t)`` over ``window``.

    Fitted by least squares on ``log(S - S_inf)``.  ``S_inf`` defaults to the
    entropy of the constant state with the record's initial mass.  Raw
    ``times``/``entropy`` arrays may be given instead of a record.

    Raises
    ------
    DegenerateWindow
        If fewer than 3 samples in the window lie strictly above ``S_inf``.
    """
    if record is not None:
        times = record.times if times is None else times
        entropy = record.entropy if entropy is None else entropy
        if s_inf is None:
            s_inf = record.steady_entropy()
    if times is None or entropy is None or s_inf is None:
        raise ValueError("need a record or explicit times, entropy and s_inf")
    t = np.asarray(times, dtype=float)
    gap = np.asarray(entropy, dtype=float) - s_inf
    scale = max(1.0, abs(s_inf))
    keep = (t >= window[0]) & (t <= window[1]) & (gap > 1e-13 * scale)
    if np.count_nonzero(keep) < 3:
        raise DegenerateWindow(f"{np.count_nonzero(keep)} usable samples in window {window}")
    slope = np.polyfit(t[keep], np.log(gap[keep]), 1)[0]
    return float(-slope)


def restrict(u_ref: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Point-sample a fine periodic field at the nodes of a coarser grid."""
    u_ref = np.asarray(u_ref)
    if u_ref.ndim != len(shape):
        raise IncompatibleGrids(f"dimension mismatch {u_ref.shape} vs {shape}")
    steps = []
    for nf, nc in zip(u_ref.shape, shape):
        if nc <= 0 or nf % nc:
            raise IncompatibleGrids(f"reference resolution {nf} is not a multiple of {nc}")
        steps.append(nf // nc)
    return u_ref[tuple(slice(None, None, s) for s in steps)]


def l2_error(u: np.ndarray, u_ref: np.ndarray, h: float | None = None) -> float:
    """``(h^d sum (u_i - u_ref_i)^2)^(1/2)`` on the coarse nodes.

    ``h`` defaults to the unit-torus spacing ``1 / u.shape[0]``.
    """
    u = np.asarray(u, dtype=float)
    if h is None:
        h = 1.0 / u.shape[0]
    diff = u - restrict(u_ref, u.shape)
    return float(np.sqrt(h**u.ndim * np.sum(diff * diff)))


def convergence_order(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Regression slope of ``log(error)`` against ``log(h)``."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.shape != errors.shape or hs.size < 2:
        raise ValueError("need at least two (h, error) pairs")
    if len(np.unique(hs)) != hs.size:
        raise ValueError("grid sizes must be distinct")
    if np.any(hs <= 0) or np.any(errors <= 0):
        raise ValueError("grid sizes and errors must be positive")
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def local_orders(hs: Sequence[float], errors: Sequence[float]) -> np.ndarray:
    """Pairwise orders between consecutive entries; the first is NaN."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    out = np.full(hs.size, np.nan)
    out[1:] = np.log(errors[1:] / errors[:-1]) / np.log(hs[1:] / hs[:-1])
    return out


def high_frequency_energy(u: np.ndarray, grid: TorusGrid) -> float:
    """``h^d sum |grad^+ u|^2``; for square pixels and d = 2 this is ``h^2 sum``."""
    return grid.integrate(sum(g * g for g in grid.gradient_fwd(u)))
