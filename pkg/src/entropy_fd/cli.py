"""Command-line driver: ``entropy-fd {evolve,convergence,denoise,check}``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import experiments
from .config import RunConfig, load
from .errors import (
    ConfigError,
    IncompatibleGrids,
    MalformedHeader,
    NonpositiveState,
    PositivityLoss,
    StepSizeUnderflow,
    TruncatedData,
    UnknownPreset,
)
from .scheme1d import AverageRule, Variant

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_POSITIVITY = 3
EXIT_UNDERFLOW = 4
EXIT_CHECK = 5

# CLI flag -> RunConfig field
_OVERRIDES = {
    "alpha": "alpha",
    "beta": "beta",
    "a": "a",
    "b": "b",
    "n": "n",
    "dim": "dim",
    "h": "h",
    "t_end": "t_end",
    "out_dir": "out_dir",
    "variant": "variant",
    "average": "average",
    "equation": "equation",
    "initial": "initial",
    "atol": "atol",
    "rtol": "rtol",
    "seed": "seed",
    "floor": "floor",
}


def _times(s: str):
    try:
        return tuple(float(p) for p in s.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--equation", choices=("dlss", "thin-film", "custom"))
    common.add_argument("--alpha", type=float, help="entropy index")
    common.add_argument("--beta", type=float)
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--dim", type=int, choices=(1, 2), help="space dimension")
    common.add_argument("--n", type=int, help="points per axis")
    common.add_argument("--h", type=float, help="grid spacing (default 1/n)")
    common.add_argument("--t-end", type=float)
    common.add_argument("--times", type=_times, help="output times, comma separated")
    common.add_argument("--out-dir")
    common.add_argument("--variant", choices=[v.value for v in Variant])
    common.add_argument("--average", choices=[r.value for r in AverageRule])
    common.add_argument("--initial", help="initial-data preset")
    common.add_argument("--seed", type=int)
    common.add_argument("--atol", type=float)
    common.add_argument("--rtol", type=float)
    common.add_argument("--floor", type=float, help="positivity floor for image data")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="entropy-fd", description="Entropy-dissipating schemes for fourth-order diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="integrate one configuration")
    conv = sub.add_parser("convergence", parents=[common], help="self-convergence study")
    conv.add_argument("--h-list", type=_times)
    conv.add_argument("--h-ref", type=float)
    den = sub.add_parser("denoise", parents=[common], help="2D thin-film smoothing of a PGM image")
    den.add_argument("--input", help="PGM file (default: built-in synthetic picture)")
    sub.add_parser("check", parents=[common], help="run the identity checks")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load(args.config) if args.config else RunConfig()
    kw = {field: getattr(args, flag) for flag, field in _OVERRIDES.items()}
    kw["times"] = args.times
    if getattr(args, "h_list", None) is not None:
        kw["h_list"] = args.h_list
    if getattr(args, "h_ref", None) is not None:
        kw["h_ref"] = args.h_ref
    if args.command == "denoise":
        kw["dim"] = 2
        if args.equation is None and cfg.equation == "dlss":
            kw["equation"] = "thin-film"
    return cfg.with_overrides(**kw)


def _dispatch(args, cfg: RunConfig) -> int:
    if args.command == "evolve":
        res = experiments.run_evolve(cfg)
        print(f"t_end={cfg.t_end:g}: {res.n_accepted} steps ({res.n_rejected} rejected), output in {cfg.out_dir}")
    elif args.command == "convergence":
        hs, errors, slope = experiments.run_convergence(cfg)
        for h, e in zip(hs, errors):
            print(f"h={h:.6g}  error={e:.6e}")
        print(f"order {slope:.4f}")
    elif args.command == "denoise":
        res = experiments.run_denoise(cfg, args.input)
        print(f"{len(res.record.snapshots)} images written to {cfg.out_dir}")
    else:
        checks = experiments.run_check(cfg)
        print(experiments.format_checks(checks))
        if any(c.failed for c in checks):
            return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _dispatch(args, cfg)
    except (ConfigError, UnknownPreset, IncompatibleGrids, MalformedHeader, TruncatedData, NonpositiveState, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PositivityLoss as exc:
        print(f"positivity lost: {exc}", file=sys.stderr)
        return EXIT_POSITIVITY
    except StepSizeUnderflow as exc:
        print(f"step size underflow: {exc}", file=sys.stderr)
        return EXIT_UNDERFLOW


if __name__ == "__main__":
    sys.exit(main())
