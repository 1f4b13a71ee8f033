"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ModinvError, NumericalFailure
from .experiments import (
    ExperimentConfig,
    error_bound_study,
    load_config,
    measurements,
    run_experiment,
    summary_json,
    sweep_domain,
    sweep_m,
)
from .grid import write_field_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _parse_values(text: str, cast):
    """``"8..40"`` (integer range), ``"8..40:4"`` (with step) or ``"10,20,30"``."""
    if ".." in text:
        span, _, step = text.partition(":")
        lo, hi = span.split("..")
        return list(range(int(lo), int(hi) + 1, int(step or 1)))
    return [cast(v) for v in text.replace(",", " ").split()]


def _emit(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def _config(args) -> ExperimentConfig:
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value
    if args.problem:
        overrides["problem"] = args.problem
    if args.noise:
        overrides["noise_levels"] = args.noise
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    if args.allow_rank_deficient:
        overrides["allow_rank_deficient"] = True
    cfg = load_config(args.config, **overrides)
    if args.out and args.command == "estimate":
        cfg = replace(cfg, out=args.out)
    return cfg.resolved()


def _cmd_simulate(cfg: ExperimentConfig, args) -> None:
    meas, _, info = measurements(cfg)
    second = "u_t" if cfg.problem == "kawahara" else "u_tt"
    meta = {
        "problem": cfg.problem,
        "L": cfg.L,
        "T": cfg.T,
        "Nx": cfg.Nx,
        "Nt": info["Nt"],
        "t_star": [m.t for m in meas],
        "t_index": [m.t_index for m in meas],
    }
    if args.format == "json":
        meta["u"] = [m.u.values.tolist() for m in meas]
        meta[second] = [m.second.values.tolist() for m in meas]
        _emit(json.dumps(meta, indent=2, sort_keys=True) + "\n", args.out, "simulate.json")
        return
    if args.out is None:
        raise argparse.ArgumentTypeError("simulate --format csv needs --out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for m in meas:
        write_field_csv(out / f"u_t{m.t_index}.csv", m.u)
        write_field_csv(out / f"{second}_t{m.t_index}.csv", m.second)
    (out / "simulate.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _cmd_estimate(cfg: ExperimentConfig, args) -> None:
    records = run_experiment(cfg)
    if args.format == "json":
        if args.out is None:
            sys.stdout.write(summary_json(records))
        return
    keys = sorted({k for r in records for k in r.relative_error_percent})
    lines = [",".join(["problem", "noise_level", "seed"] + [f"rel_err_{k}" for k in keys])]
    for r in records:
        errs = [repr(r.relative_error_percent.get(k, float("nan"))) for k in keys]
        lines.append(",".join([r.problem, repr(r.noise_level), str(r.seed)] + errs))
    _emit("\n".join(lines) + "\n", args.out, "summary.csv")


def _cmd_sweep(cfg: ExperimentConfig, args) -> None:
    if args.command == "sweep-m":
        values = _parse_values(args.values or "8..40", int)
        result = sweep_m(cfg, values)
    else:
        default = " ".join(str(cfg.L * k / 6) for k in range(1, 7))
        values = _parse_values(args.values or default, float)
        result = sweep_domain(cfg, values)
    name = "sweep_" + result.axis
    if args.format == "json":
        payload = {
            "axis": result.axis,
            "values": list(result.values),
            "median_rel_err": {k: list(v) for k, v in result.errors.items()},
            "argmin": {k: result.argmin(k) for k in result.errors},
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out, name + ".json")
    else:
        _emit(result.to_csv(), args.out, name + ".csv")


def _cmd_error_bound(cfg: ExperimentConfig, args) -> None:
    levels = tuple(_parse_values(args.values, float)) if args.values else (1, 3, 5, 10)
    checks = error_bound_study(cfg, levels, args.draws)
    if args.format == "json":
        payload = [
            {"level": c.level, "draw": c.draw, "error_norm": c.error_norm, "bound": c.bound}
            for c in checks
        ]
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out, "error_bound.json")
    else:
        lines = ["level,draw,error_norm,bound,violated"]
        lines += [
            f"{c.level!r},{c.draw},{c.error_norm!r},{c.bound!r},{int(c.violated)}" for c in checks
        ]
        _emit("\n".join(lines) + "\n", args.out, "error_bound.csv")
    bad = sum(c.violated for c in checks)
    print(f"{len(checks)} draws, {bad} bound violations", file=sys.stderr)


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "sweep-m": _cmd_sweep,
    "sweep-domain": _cmd_sweep,
    "error-bound": _cmd_error_bound,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; every key may sit in any section")
    common.add_argument(
        "--seed", type=int, help="run this single seed instead of the configured list"
    )
    common.add_argument("--out", help="output directory (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--problem", choices=("ip1", "ip2", "ip2-const", "ip3", "kawahara"))
    common.add_argument("--noise", help="noise levels in percent, e.g. '0,1,5'")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    common.add_argument(
        "--allow-rank-deficient",
        action="store_true",
        help="keep minimum-norm solutions of rank-deficient systems instead of failing",
    )

    parser = argparse.ArgumentParser(
        prog="modinv", description="Modulating-function estimation of PDE sources and coefficients."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="generate the measured slices")
    sub.add_parser(
        "estimate", parents=[common], help="run estimation for every noise level and seed"
    )
    for name, what in (
        ("sweep-m", "M values, e.g. 8..40"),
        ("sweep-domain", "L* values, e.g. 10,20,60"),
    ):
        p = sub.add_parser(
            name, parents=[common], help=f"median error over seeds for each of {what}"
        )
        p.add_argument("--values", help=what)
    p = sub.add_parser(
        "error-bound", parents=[common], help="check the noise error bound on random draws"
    )
    p.add_argument("--values", help="noise levels, default 1,3,5,10")
    p.add_argument("--draws", type=int, default=100)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        COMMANDS[args.command](cfg, args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ModinvError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
