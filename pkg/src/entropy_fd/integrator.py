"""Adaptive stiff time integration for ``du/dt = F(u)`` with positive states.

Implicit Euler and variable-step BDF2 solve their stage equation with a
simplified Newton iteration.  The Jacobian is built by finite differences
on a column colouring of the stencil's sparsity pattern, and the Newton
matrix is factorised with a sparse LU.  Positivity of the iterates is kept
by step-halving, never by clipping.  An explicit Dormand-Prince RK45 is
available for short, mildly stiff horizons.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import NonpositiveState, PositivityLoss, StepSizeUnderflow

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
_ROUNDOFF = 64 * _EPS


class Method(enum.Enum):
    IMPLICIT_EULER = "implicit-euler"
    BDF2 = "bdf2"
    RK45 = "rk45"


class JacobianKind(enum.Enum):
    BANDED = "fd-banded"
    COLORED = "fd-colored"
    MATRIX_FREE = "matrix-free"


@dataclass
class SolverConfig:
    method: Method = Method.BDF2
    atol: float = 1e-3
    rtol: float = 1e-6
    dt_init: float | None = None  # None: estimated from |u| / |F(u)|
    dt_min: float = 1e-40
    dt_max: float = math.inf
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    jacobian: JacobianKind | None = None  # None picks BANDED in 1D, COLORED otherwise
    safety: float = 0.9
    max_steps: int = 2_000_000

    def __post_init__(self):
        self.method = Method(self.method)
        if self.jacobian is not None:
            self.jacobian = JacobianKind(self.jacobian)
        dt_init = self.dt_min if self.dt_init is None else self.dt_init
        if not (0 < self.dt_min <= dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not (self.atol > 0 and self.rtol > 0):
            raise ValueError("atol and rtol must be positive")
        if not self.newton_tol > 0 or self.newton_max_iter < 1:
            raise ValueError("invalid Newton settings")

    def weights(self, *states: np.ndarray) -> np.ndarray:
        scale = np.max(np.abs(np.stack(states)), axis=0)
        return self.atol + self.rtol * scale

    def initial_step(self, u: np.ndarray, fu: np.ndarray, t_end: float) -> float:
        if self.dt_init is not None:
            return min(self.dt_init, t_end)
        w = self.weights(u)
        d0 = np.sqrt(np.mean((u / w) ** 2))
        d1 = np.sqrt(np.mean((fu / w) ** 2))
        dt = 0.01 * d0 / d1 if d1 > 1e-300 and d0 > 1e-5 else 1e-6 * t_end
        return float(min(max(dt, self.dt_min), self.dt_max, t_end))


@dataclass
class StepResult:
    accepted: bool
    dt_used: float
    dt_next: float
    newton_iters: int = 0
    error_estimate: float = 0.0


@dataclass
class Integration:
    """Outcome of :func:`integrate`."""

    t: float
    u: np.ndarray
    output_times: list[float] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)
    accepted_times: list[float] = field(default_factory=list)
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    n_jac: int = 0


# Jacobian machinery


def sparsity_pattern(shape: Sequence[int], stencil: Iterable[Sequence[int]]) -> sps.csc_matrix:
    """Boolean pattern of ``dF_i/du_j`` for a periodic stencil; rows are outputs."""
    shape = tuple(shape)
    n = int(np.prod(shape))
    idx = np.arange(n).reshape(shape)
    rows, cols = [], []
    for off in stencil:
        rows.append(idx.ravel())
        cols.append(np.roll(idx, [-o for o in off], axis=tuple(range(len(shape)))).ravel())
    data = np.ones(sum(len(r) for r in rows), dtype=bool)
    S = sps.csc_matrix((data, (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    S.sum_duplicates()
    S.data[:] = True
    return S


def color_columns(S: sps.csc_matrix) -> np.ndarray:
    """Greedy colouring so that no two columns of one colour share a row."""
    S = sps.csc_matrix(S, dtype=np.int8)
    G = (S.T @ S).tocsr()
    n = G.shape[0]
    colors = np.full(n, -1, dtype=int)
    for j in range(n):
        nb = G.indices[G.indptr[j] : G.indptr[j + 1]]
        used = set(colors[nb[nb < j]].tolist())
        c = 0
        while c in used:
            c += 1
        colors[j] = c
    return colors


class FDJacobian:
    """Compressed finite-difference Jacobian of ``F`` on a fixed pattern."""

    def __init__(self, pattern: sps.csc_matrix, atol: float):
        self.pattern = sps.csc_matrix(pattern)
        self.pattern.sort_indices()
        self.rows = self.pattern.indices
        self.cols = np.repeat(np.arange(self.pattern.shape[1]), np.diff(self.pattern.indptr))
        self.colors = color_columns(self.pattern)
        self.ncolors = int(self.colors.max()) + 1
        self.entry_groups = [np.flatnonzero(self.colors[self.cols] == c) for c in range(self.ncolors)]
        self.col_groups = [np.flatnonzero(self.colors == c) for c in range(self.ncolors)]
        self.atol = atol

    def __call__(self, F, u: np.ndarray, f0: np.ndarray, shape) -> sps.csc_matrix:
        eps = math.sqrt(_EPS) * np.maximum(np.abs(u), self.atol)
        data = np.empty(len(self.rows))
        for cols, entries in zip(self.col_groups, self.entry_groups):
            du = np.zeros_like(u)
            du[cols] = eps[cols]
            f1 = F((u + du).reshape(shape)).ravel()
            r, c = self.rows[entries], self.cols[entries]
            data[entries] = (f1[r] - f0[r]) / eps[c]
        return sps.csc_matrix((data, self.pattern.indices, self.pattern.indptr), shape=self.pattern.shape)


class _NewtonMatrix:
    """Factorised ``I - gamma J``, or a matrix-free GMRES surrogate."""

    def __init__(self, jac, gamma: float, matrix_free=None):
        self.gamma = gamma
        if matrix_free is not None:
            self._mf = matrix_free
            self._lu = None
        else:
            n = jac.shape[0]
            M = (sps.identity(n, format="csc") - gamma * jac).tocsc()
            self._lu = spla.splu(M)

    def solve(self, r: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            return self._lu.solve(r)
        f, u, f0 = self._mf
        n = u.size

        def mv(x):
            nx = np.linalg.norm(x)
            if nx == 0:
                return x.copy()
            e = math.sqrt(_EPS) * max(1.0, np.linalg.norm(u)) / nx
            return x - self.gamma * (f(u + e * x) - f0) / e

        # finite-difference matvecs limit the attainable accuracy to ~sqrt(eps)
        op = spla.LinearOperator((n, n), matvec=mv)
        x, _ = spla.gmres(op, r, rtol=1e-7, atol=0.0, restart=min(n, 60), maxiter=5)
        return x


class Integrator:
    """Stateful stepper; :func:`integrate` is the usual entry point."""

    def __init__(self, F: Callable[[np.ndarray], np.ndarray], cfg: SolverConfig, shape, stencil=None):
        self.F = F
        self.cfg = cfg
        self.shape = tuple(shape)
        self.n_rhs = 0
        self.n_jac = 0
        kind = cfg.jacobian
        if kind is None:
            kind = JacobianKind.BANDED if len(self.shape) == 1 else JacobianKind.COLORED
        self.kind = kind
        self.jac = None
        if cfg.method is not Method.RK45 and kind is not JacobianKind.MATRIX_FREE:
            if stencil is None:
                stencil = getattr(F, "stencil", None)
            if stencil is None:
                n = int(np.prod(self.shape))
                pattern = sps.csc_matrix(np.ones((n, n), dtype=bool))
            else:
                pattern = sparsity_pattern(self.shape, stencil)
            self.jac = FDJacobian(pattern, cfg.atol)
        # history for BDF2
        self.prev: tuple[float, np.ndarray] | None = None
        self.err_prev = 1.0

    def f(self, u: np.ndarray) -> np.ndarray:
        self.n_rhs += 1
        return self.F(u.reshape(self.shape)).ravel()

    def _newton_matrix(self, u, fu, gamma):
        if self.kind is JacobianKind.MATRIX_FREE:
            return _NewtonMatrix(None, gamma, (self.f, u, fu))
        self.n_jac += 1
        J = self.jac(self.F, u, fu, self.shape)
        self.n_rhs += self.jac.ncolors
        return _NewtonMatrix(J, gamma)

    def _solve_stage(self, c: np.ndarray, gamma: float, y0: np.ndarray, M: _NewtonMatrix, weights_ref: np.ndarray):
        """Solve ``y - c - gamma F(y) = 0``; returns ``(y, F(y), iters)`` or ``None``.

        Iteration stops at ``newton_tol``.  Rounding in ``F`` (which carries
        ``h^-4`` terms) can floor the residual far above that on fine grids,
        so a stalled iteration is also accepted once its Newton increment is
        at rounding level relative to ``y``.  Any other stall switches to full
        Newton (a fresh Jacobian every iteration) for the rest of the solve.
        """
        cfg = self.cfg
        y = y0.copy()
        prev_norm = math.inf
        full_newton = False
        for it in range(1, cfg.newton_max_iter + 1):
            try:
                fy = self.f(y)
            except NonpositiveState:
                return None, None, it
            r = y - c - gamma * fy
            w = cfg.atol + cfg.rtol * np.maximum(np.abs(y), weights_ref)
            floor = 16 * _EPS * (np.abs(y) + np.abs(c) + np.abs(gamma * fy))
            if np.all(np.abs(r) <= cfg.newton_tol * w + floor):
                return y, fy, it
            norm = float(np.max(np.abs(r) / w))
            if not np.isfinite(norm):
                return None, None, it
            delta = -M.solve(r)
            if norm > 0.5 * prev_norm:
                if np.all(np.abs(delta) <= cfg.newton_tol * w + _ROUNDOFF * np.abs(y)):
                    return y, fy, it
                full_newton = full_newton or norm > prev_norm or it > 3
            if full_newton:
                M = self._newton_matrix(y, fy, gamma)
                delta = -M.solve(r)
            prev_norm = norm
            s = 1.0
            for _ in range(40):
                trial = y + s * delta
                if np.all(trial > 0):
                    break
                s *= 0.5
            else:
                return None, None, it
            y = trial
        return None, None, cfg.newton_max_iter

    def _weighted_rms(self, err, u, y) -> float:
        w = self.cfg.weights(u, y)
        return float(np.sqrt(np.mean((err / w) ** 2)))

    def step(self, t: float, u: np.ndarray, fu: np.ndarray, dt: float):
        """One attempted step from ``(t, u)``.

        Returns ``(y, f(y), StepResult, positivity_failure)``; ``y`` is ``None``
        when the step was rejected.
        """
        cfg = self.cfg
        if cfg.method is Method.RK45:
            return self._step_rk45(t, u, fu, dt)
        use_bdf2 = cfg.method is Method.BDF2 and self.prev is not None
        if use_bdf2:
            t_prev, u_prev = self.prev
            omega = dt / (t - t_prev)
            a0 = (1 + 2 * omega) / (1 + omega)
            c = ((1 + omega) * u - omega**2 / (1 + omega) * u_prev) / a0
            gamma = dt / a0
            # quadratic through u_prev, u with slope f(u) at t
            h1 = t - t_prev
            q = (u_prev - u + h1 * fu) / h1**2
            pred = u + dt * fu + q * dt**2
            y0 = u + omega * (u - u_prev)
            if not np.all(y0 > 0):
                y0 = u.copy()
            order = 2
        else:
            c, gamma, y0, order = u, dt, u.copy(), 1
        M = self._newton_matrix(u, fu, gamma)
        y, fy, iters = self._solve_stage(c, gamma, y0, M, np.abs(u))
        if y is None:
            return None, None, StepResult(False, dt, 0.5 * dt, iters, math.inf), True
        if order == 2:
            est = (omega + 1) / (3 * omega + 2) * (y - pred)
        else:
            est = M.solve(0.5 * (y - u - dt * fu))
        err = self._weighted_rms(est, u, y)
        k = order + 1
        if err <= 1.0:
            fac = cfg.safety * max(err, 1e-10) ** (-0.7 / k) * max(self.err_prev, 1e-10) ** (0.4 / k)
            dt_next = dt * min(5.0, max(0.2, fac))
            return y, fy, StepResult(True, dt, dt_next, iters, err), False
        fac = max(0.2, cfg.safety * err ** (-1.0 / k))
        return None, None, StepResult(False, dt, dt * fac, iters, err), False

    # Dormand-Prince 5(4)
    _A = [
        [],
        [1 / 5],
        [3 / 40, 9 / 40],
        [44 / 45, -56 / 15, 32 / 9],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
    _E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

    def _step_rk45(self, t, u, fu, dt):
        ks = [fu]
        try:
            for row in self._A[1:]:
                stage = u + dt * sum(a * kk for a, kk in zip(row, ks))
                if not np.all(stage > 0):
                    raise NonpositiveState("RK stage")
                ks.append(self.f(stage))
        except NonpositiveState:
            return None, None, StepResult(False, dt, 0.5 * dt), True
        y = stage  # last row of A holds the 5th-order weights (FSAL)
        fy = ks[-1]
        est = dt * sum(e * kk for e, kk in zip(self._E, ks))
        err = self._weighted_rms(est, u, y)
        if err <= 1.0:
            fac = self.cfg.safety * max(err, 1e-10) ** (-0.7 / 5) * max(self.err_prev, 1e-10) ** (0.4 / 5)
            return y, fy, StepResult(True, dt, dt * min(5.0, max(0.2, fac)), 0, err), False
        fac = max(0.2, self.cfg.safety * err ** (-0.2))
        return None, None, StepResult(False, dt, dt * fac, 0, err), False


def integrate(
    u0: np.ndarray,
    F: Callable[[np.ndarray], np.ndarray],
    cfg: SolverConfig,
    t_end: float,
    observers: Sequence[Callable[[float, np.ndarray], None]] = (),
    output_times: Sequence[float] = (),
    stencil=None,
) -> Integration:
    """Integrate from ``t = 0`` to ``t_end``.

    ``observers`` are called as ``obs(t, u)`` at ``t = 0`` and after every
    accepted step.  States at ``output_times`` are linearly interpolated
    between accepted states; ``t_end`` itself is hit exactly.

    Raises
    ------
    StepSizeUnderflow, PositivityLoss
        With the failing time attached as ``err.t``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    u = np.asarray(u0, dtype=float)
    shape = u.shape
    if not np.all(u > 0):
        raise NonpositiveState("initial state must be positive")
    outs = sorted(float(s) for s in output_times)
    if any(s < 0 or s > t_end for s in outs):
        raise ValueError("output times must lie in [0, t_end]")
    stepper = Integrator(F, cfg, shape, stencil)
    res = Integration(t=0.0, u=u.copy())
    u = u.ravel().copy()
    t = 0.0
    fu = stepper.f(u)
    for obs in observers:
        obs(t, u.reshape(shape))
    res.accepted_times.append(t)
    oi = 0
    while oi < len(outs) and outs[oi] <= 0.0:
        res.output_times.append(outs[oi])
        res.outputs.append(u.reshape(shape).copy())
        oi += 1
    dt = cfg.initial_step(u, fu, t_end)
    steps = 0
    while t < t_end:
        steps += 1
        if steps > cfg.max_steps:
            raise StepSizeUnderflow(f"exceeded max_steps={cfg.max_steps}", t)
        dt = min(dt, cfg.dt_max)
        last = t + dt >= t_end * (1 - 1e-13)
        if last:
            dt = t_end - t
        y, fy, info, pos_fail = stepper.step(t, u, fu, dt)
        if y is None:
            res.n_rejected += 1
            dt = info.dt_next
            if dt < cfg.dt_min:
                cls = PositivityLoss if pos_fail else StepSizeUnderflow
                raise cls(f"step size {dt:.3e} below dt_min", t)
            continue
        t_new = t_end if last else t + dt
        while oi < len(outs) and outs[oi] <= t_new:
            theta = (outs[oi] - t) / (t_new - t)
            res.output_times.append(outs[oi])
            res.outputs.append(((1 - theta) * u + theta * y).reshape(shape))
            oi += 1
        stepper.prev = (t, u)
        stepper.err_prev = max(info.error_estimate, 1e-10)
        t, u, fu = t_new, y, fy
        res.n_accepted += 1
        res.accepted_times.append(t)
        for obs in observers:
            obs(t, u.reshape(shape))
        dt = info.dt_next
    res.t = t
    res.u = u.reshape(shape)
    res.n_rhs = stepper.n_rhs
    res.n_jac = stepper.n_jac
    return res

