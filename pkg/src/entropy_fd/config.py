"""Run configuration: a flat INI-style ``key = value`` file with sections.

Example::

    [equation]
    preset = dlss

    [entropy]
    alpha = 0.0

    [grid]
    n = 100

    [initial]
    preset = cos16

    [solver]
    atol = 1e-10
    rtol = 1e-10

    [output]
    t_end = 1e-4
    times = 1e-8, 1e-6

Every key is optional.  ``lambda4`` and ``h`` may be ``none``, meaning the
optimal ``lambda4`` and ``h = 1 / n``.  Floats are rendered with ``repr`` so
``parse(render(cfg)) == cfg``.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field, fields

from .coeffs import EntropySpec, ModelParams, admissibility_K
from .errors import ConfigError
from .integrator import JacobianKind, Method, SolverConfig
from .scheme1d import Alpha1Form, AverageRule, SchemeConfig, Variant

EQUATIONS = ("dlss", "thin-film", "custom")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _opt_str(s: str):
    return None if s.strip().lower() in ("", "none") else s.strip()


def _floats(s: str):
    return tuple(float(p) for p in s.replace(",", " ").split())


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def _setting(section: str, parse, default=dataclasses.MISSING, key: str | None = None):
    meta = {"section": section, "parse": parse, "key": key}
    if isinstance(default, tuple):
        return field(default_factory=lambda d=default: d, metadata=meta)
    return field(default=default, metadata=meta)


@dataclass(frozen=True)
class RunConfig:
    equation: str = _setting("equation", str.strip, "dlss", key="preset")
    a: float | None = _setting("equation", _opt_float, None)
    b: float | None = _setting("equation", _opt_float, None)
    beta: float | None = _setting("equation", _opt_float, None)

    alpha: float = _setting("entropy", float, 0.0)
    lambda4: float | None = _setting("entropy", _opt_float, None)

    dim: int = _setting("scheme", int, 1)
    variant: str = _setting("scheme", str.strip, Variant.CENTRAL.value)
    average: str = _setting("scheme", str.strip, AverageRule.IDENTITY.value)
    alpha1_form: str = _setting("scheme", str.strip, Alpha1Form.CONSISTENT.value)
    allow_no_guarantee: bool = _setting("scheme", lambda s: s.strip().lower() in ("1", "true", "yes", "on"), False)

    n: int = _setting("grid", int, 100)
    h: float | None = _setting("grid", _opt_float, None)

    initial: str = _setting("initial", str.strip, "cos16", key="preset")
    seed: int = _setting("initial", int, 0)
    floor: float = _setting("initial", float, 1e-2)
    image: str | None = _setting("initial", _opt_str, None)

    method: str = _setting("solver", str.strip, Method.BDF2.value)
    atol: float = _setting("solver", float, 1e-3)
    rtol: float = _setting("solver", float, 1e-6)
    dt_init: float | None = _setting("solver", _opt_float, None)
    dt_min: float = _setting("solver", float, 1e-40)
    dt_max: float = _setting("solver", float, math.inf)
    newton_tol: float = _setting("solver", float, 1e-10)
    newton_max_iter: int = _setting("solver", int, 25)
    jacobian: str | None = _setting("solver", _opt_str, None)

    t_end: float = _setting("output", float, 1e-4)
    times: tuple[float, ...] = _setting("output", _floats, ())
    out_dir: str = _setting("output", str.strip, "out")

    h_list: tuple[float, ...] = _setting("convergence", _floats, (1 / 32, 1 / 64, 1 / 128))
    h_ref: float = _setting("convergence", float, 1 / 512)

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ConfigError(f"unknown equation {self.equation!r}; expected one of {EQUATIONS}")
        for name, enum_cls in (("variant", Variant), ("average", AverageRule), ("alpha1_form", Alpha1Form), ("method", Method)):
            try:
                enum_cls(getattr(self, name))
            except ValueError:
                allowed = [e.value for e in enum_cls]
                raise ConfigError(f"{name}={getattr(self, name)!r}; expected one of {allowed}") from None
        if self.jacobian is not None:
            try:
                JacobianKind(self.jacobian)
            except ValueError:
                raise ConfigError(f"unknown jacobian {self.jacobian!r}") from None
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 3:
            raise ConfigError(f"n must be at least 3, got {self.n}")
        if self.h is not None and not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")

    # resolution

    def model(self) -> ModelParams:
        if self.equation == "dlss":
            base = ModelParams.dlss()
        elif self.equation == "thin-film":
            base = ModelParams.thin_film(2.0 if self.beta is None else self.beta)
        else:
            if None in (self.a, self.b, self.beta):
                raise ConfigError("equation=custom needs a, b and beta")
            base = ModelParams(self.a, self.b, self.beta)
        try:
            return ModelParams(
                base.a if self.a is None else self.a,
                base.b if self.b is None else self.b,
                base.beta if self.beta is None else self.beta,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def spacing(self) -> float:
        return 1.0 / self.n if self.h is None else self.h

    def admissibility(self) -> float:
        return admissibility_K(EntropySpec(self.alpha), self.model())

    def scheme_config(self) -> SchemeConfig:
        try:
            return SchemeConfig.build(
                self.alpha,
                self.model(),
                lambda4=self.lambda4,
                variant=Variant(self.variant),
                average=AverageRule(self.average),
                alpha1_form=Alpha1Form(self.alpha1_form),
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from None

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(
                method=Method(self.method),
                atol=self.atol,
                rtol=self.rtol,
                dt_init=self.dt_init,
                dt_min=self.dt_min,
                dt_max=self.dt_max,
                newton_tol=self.newton_tol,
                newton_max_iter=self.newton_max_iter,
                jacobian=None if self.jacobian is None else JacobianKind(self.jacobian),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def with_overrides(self, **kw) -> "RunConfig":
        """Replace the given fields, ignoring ``None`` values."""
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return dataclasses.replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _key(f) -> str:
    return f.metadata["key"] or f.name


def render(cfg: RunConfig) -> str:
    sections: dict[str, list[str]] = {}
    for f in fields(RunConfig):
        sections.setdefault(f.metadata["section"], []).append(f"{_key(f)} = {_render(getattr(cfg, f.name))}")
    return "\n".join(f"[{name}]\n" + "\n".join(lines) + "\n" for name, lines in sections.items())


def parse(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    spec = {(f.metadata["section"], _key(f)): f for f in fields(RunConfig)}
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            f = spec.get((section, key.replace("-", "_")))
            if f is None:
                raise ConfigError(f"unknown key [{section}] {key}")
            try:
                values[f.name] = f.metadata["parse"](raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
    return RunConfig(**values)


def load(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
