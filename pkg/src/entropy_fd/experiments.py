"""Initial-data presets and the evolve / convergence / denoise / check drivers."""

from __future__ import annotations

import logging
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .coeffs import coercivity_constant, nonneg_margin, verify_flux_identification
from .config import RunConfig
from .errors import ConfigError, IncompatibleGrids, UnknownPreset
from .grid import TorusGrid
from .integrator import integrate
from .pgm import bundled_image, field_to_image, image_to_field, load_pgm, save_pgm
from .scheme1d import Scheme1D, compute_xi, entropy_variables, product_rule_residual
from .scheme2d import NoLyapunovGuarantee, Scheme2D, Scheme2DConfig, product_rule_residual_2d

log = logging.getLogger(__name__)

COS16_FLOOR = 1e-10
STEP_LOW = 1e-6


def _cos16(x):
    return np.maximum(COS16_FLOOR, np.cos(np.pi * x) ** 16)


def _step(x):
    return np.where(x < 0.5, 2.0 - STEP_LOW, STEP_LOW)


def _sine(x):
    return 1.0 + 0.5 * np.sin(2 * np.pi * x)


def _sine_full(x):
    return 1.0 + (1.0 - 1e-16) * np.sin(2 * np.pi * x)


_PROFILES = {"cos16": _cos16, "step": _step, "sine": _sine, "sine-full": _sine_full}
PRESETS = (*_PROFILES, "constant", "random-positive")


def preset_initial_data(name: str, grid: TorusGrid, seed: int = 0) -> np.ndarray:
    """Nodal values of a named initial datum; profiles vary along axis 0.

    ``random-positive`` draws from U(0.5, 1.5); ``random-positive(7)`` fixes
    the seed inline.
    """
    m = re.fullmatch(r"random-positive(?:\((\d+)\))?", name.strip())
    if m:
        rng = np.random.default_rng(int(m.group(1)) if m.group(1) else seed)
        return rng.uniform(0.5, 1.5, grid.dims)
    if name == "constant":
        return np.ones(grid.dims)
    try:
        profile = _PROFILES[name]
    except KeyError:
        raise UnknownPreset(f"unknown initial datum {name!r}; known: {', '.join(PRESETS)}") from None
    return profile(grid.coords()[0])


# construction


def build_grid(cfg: RunConfig) -> TorusGrid:
    return TorusGrid((cfg.n,) * cfg.dim, cfg.spacing)


def build_scheme(cfg: RunConfig, grid: TorusGrid, allow_no_guarantee: bool | None = None):
    if allow_no_guarantee is None:
        allow_no_guarantee = cfg.allow_no_guarantee
    if grid.ndim == 1:
        K = cfg.admissibility()
        if K < 0:
            warnings.warn(f"K(alpha, beta) = {K:.4g} < 0: the entropy is not guaranteed to decay", stacklevel=2)
        return Scheme1D(cfg.scheme_config(), grid)
    model = cfg.model()
    if model.a != 0 or model.b != 0 or cfg.alpha != 0:
        raise ConfigError("the multi-dimensional scheme covers the thin-film equation (a = b = 0) with alpha = 0")
    try:
        return Scheme2D(Scheme2DConfig(model.beta, grid, cfg.average, allow_no_guarantee))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def initial_state(cfg: RunConfig):
    """``(u0, grid)``; an image datum sets its own grid."""
    if cfg.initial == "image":
        image = load_pgm(cfg.image) if cfg.image else bundled_image()
        return image_to_field(image, cfg.floor)
    grid = build_grid(cfg)
    return preset_initial_data(cfg.initial, grid, cfg.seed), grid


@dataclass
class RunResult:
    record: diag.TrajectoryRecord
    u: np.ndarray
    grid: TorusGrid
    n_accepted: int
    n_rejected: int


def simulate(cfg: RunConfig, u0=None, grid=None, output_times=None) -> RunResult:
    """Integrate ``cfg`` and record the scalar series (no files written)."""
    if u0 is None:
        u0, grid = initial_state(cfg)
    scheme = build_scheme(cfg, grid)
    alpha = scheme.alpha if isinstance(scheme, Scheme2D) else cfg.alpha
    record = diag.TrajectoryRecord(alpha, grid)
    times = cfg.times if output_times is None else output_times
    times = [t for t in times if t <= cfg.t_end]
    res = integrate(u0, scheme, cfg.solver_config(), cfg.t_end, observers=[record.observer(scheme)], output_times=times)
    for t, u in zip(res.output_times, res.outputs):
        record.snapshots[t] = u
    return RunResult(record, res.u, grid, res.n_accepted, res.n_rejected)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def snapshot_name(t: float, stem: str = "snapshot", ext: str = "csv") -> str:
    return f"{stem}_{t:.6g}.{ext}"


def run_evolve(cfg: RunConfig) -> RunResult:
    """Writes ``series.csv`` and one ``snapshot_<t>.csv`` per output time."""
    result = simulate(cfg)
    out = _out_dir(cfg)
    result.record.write_csv(out / "series.csv")
    for t, u in result.record.snapshots.items():
        diag.write_snapshot(out / snapshot_name(t), u, result.grid)
    log.info("evolve: %d accepted, %d rejected steps", result.n_accepted, result.n_rejected)
    return result


def _n_from_h(h: float) -> int:
    n = round(1.0 / h)
    if n < 3 or abs(n * h - 1.0) > 1e-9:
        raise IncompatibleGrids(f"h = {h} does not divide the unit torus")
    return n


def run_convergence(cfg: RunConfig, h_list=None, h_ref=None):
    """Self-convergence study at ``cfg.t_end``; returns ``(hs, errors, slope)``.

    Writes ``convergence.csv`` with columns ``h, error, local_order``.
    """
    hs = list(cfg.h_list if h_list is None else h_list)
    h_ref = cfg.h_ref if h_ref is None else h_ref
    if len(set(hs)) != len(hs):
        raise ConfigError("grid sizes in the convergence list must be distinct")
    n_ref = _n_from_h(h_ref)
    ns = [_n_from_h(h) for h in hs]
    for n in ns:
        if n_ref % n:
            raise IncompatibleGrids(f"reference resolution {n_ref} is not a multiple of {n}")

    def final(n):
        c = cfg.with_overrides(n=n, h=1.0 / n)
        return simulate(c, output_times=()).u

    u_ref = final(n_ref)
    errors = [diag.l2_error(final(n), u_ref, 1.0 / n) for n in ns]
    hs = [1.0 / n for n in ns]
    slope = diag.convergence_order(hs, errors)
    table = np.column_stack([hs, errors, diag.local_orders(hs, errors)])
    np.savetxt(_out_dir(cfg) / "convergence.csv", table, delimiter=",", header="h,error,local_order", comments="", fmt=diag.CSV_FORMAT)
    log.info("convergence: slope %.4f", slope)
    return hs, errors, slope


def run_denoise(cfg: RunConfig, input_path=None, times=None) -> RunResult:
    """Evolve an image with the 2D thin-film scheme and write one PGM per time.

    Without an input file the bundled synthetic 77x100 picture is used.
    """
    path = input_path or cfg.image
    image = load_pgm(path) if path else bundled_image()
    u0, grid = image_to_field(image, cfg.floor)
    times = sorted(cfg.times if times is None else times)
    if not times:
        raise ConfigError("denoise needs at least one output time")
    cfg = cfg.with_overrides(dim=2, t_end=max(times), times=tuple(times))
    out = _out_dir(cfg)
    save_pgm(field_to_image(u0), out / "input.pgm")
    result = simulate(cfg, u0, grid)
    result.record.write_csv(out / "series.csv")
    for t, u in result.record.snapshots.items():
        save_pgm(field_to_image(u), out / snapshot_name(t, "denoised", "pgm"))
    return result


# check suite


@dataclass
class Check:
    name: str
    status: str  # "pass", "fail" or "warn"
    detail: str

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def _random_states(grid: TorusGrid, count: int, seed: int):
    rng = np.random.default_rng(seed)
    x = grid.coords()[0]
    for k in range(count):
        smooth = 1.0 + 0.4 * np.sin(2 * np.pi * (k + 1) * x + rng.uniform(0, 2 * np.pi))
        yield smooth * rng.uniform(0.8, 1.2, grid.dims)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def run_check(cfg: RunConfig, n_states: int = 5) -> list[Check]:
    """Identity and structure checks for one configuration; never raises on failure."""
    checks: list[Check] = []
    grid = build_grid(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoLyapunovGuarantee)
        warnings.simplefilter("ignore", UserWarning)
        scheme = build_scheme(cfg, grid, allow_no_guarantee=True)
    states = list(_random_states(grid, n_states, cfg.seed))

    if grid.ndim == 1:
        sc = scheme.config
        res = verify_flux_identification(sc.lambdas, sc.entropy, sc.model)
        checks.append(Check("flux identification", _status(res <= 1e-10), f"residual {res:.2e}"))
        K = cfg.admissibility()
        checks.append(Check("admissibility K >= 0", "pass" if K >= 0 else "warn", f"K = {K:.6g}" + ("" if K >= 0 else " (not guaranteed)")))
        margin = nonneg_margin(sc.poly)
        if margin >= -1e-12:
            checks.append(Check("production form nonnegative", "pass", f"margin {margin:.6g}, c = {coercivity_constant(sc.poly):.6g}"))
        else:
            checks.append(Check("production form nonnegative", "warn", f"margin {margin:.6g} (not guaranteed)"))
        if sc.entropy.is_shannon:
            checks.append(Check("discrete product rule", "pass", "not applicable to the Shannon form"))
        else:
            worst = max(
                product_rule_residual(entropy_variables(u, sc.entropy).v, compute_xi(entropy_variables(u, sc.entropy), sc, grid), grid, sc.variant)
                for u in states
            )
            checks.append(Check("discrete product rule", _status(worst <= 1e-12), f"max relative defect {worst:.2e}"))
    else:
        c2 = scheme.config
        margin = c2.margin
        checks.append(Check("production form nonnegative", _status(margin >= -1e-12), f"margin {margin:.6g}"))
        worst = max(product_rule_residual_2d(-1.0 / u, grid) for u in states)
        checks.append(Check("discrete product rule", _status(worst <= 1e-12), f"max relative defect {worst:.2e}"))

    worst_id = 0.0
    worst_mass = 0.0
    for u in states:
        direct = scheme.entropy_production(u)
        closed = scheme.closed_form_production(u)
        worst_id = max(worst_id, abs(direct - closed) / max(abs(closed), abs(direct), 1e-300))
        f = scheme(u)
        worst_mass = max(worst_mass, abs(f.sum()) / max(np.abs(f).sum(), 1e-300))
    checks.append(Check("entropy production identity", _status(worst_id <= 1e-10), f"max relative defect {worst_id:.2e}"))
    checks.append(Check("mass conservation", _status(worst_mass <= 1e-12), f"max |sum F| / sum |F| = {worst_mass:.2e}"))
    return checks


def format_checks(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    return "\n".join(f"{c.status.upper():4}  {c.name:<{width}}  {c.detail}" for c in checks)
