"""Command-line front end.

Exit codes: ``stability`` returns 0/1/2 for stable, marginal and
exponentially unstable configurations.  Failures use the BSD sysexits
values: 64 usage, 65 bad config or data, 70 integration blow-up,
74 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import error_report, growth_envelope, nutation_sweep
from .analytic import ClosedFormError, nutation_profile
from .integrate import DEFAULT_DT, IntegrationBlowUp, propagate
from .io import (
    load_config,
    save_config,
    write_atomic,
    write_json,
    write_rows_csv,
    write_trajectory_csv,
)
from .model import Stability, derive_params
from .presets import EXAMPLE1, EXAMPLE2, FIG4, MARGINAL, UNSTABLE

EX_USAGE = 64
EX_DATAERR = 65
EX_SOFTWARE = 70
EX_IOERR = 74

STABILITY_EXIT = {
    Stability.STABLE: 0,
    Stability.MARGINALLY_UNSTABLE: 1,
    Stability.EXPONENTIALLY_UNSTABLE: 2,
}

SWEEP_COLUMNS = ("ixx_aug", "iyy", "izz_aug", "sigma", "lambda", "eps_n")
ERROR_COLUMNS = ("tau_min", "tau_max", "n_samples", "mre", "mse", "rmse", "r2")
GRID_AXES = ("ixx_aug", "iyy", "izz_aug")

# upper stable branch (iyy above both augmented transverse inertias)
FIG4_GRID = "ixx_aug=100:200:11,iyy=250:400:16,izz_aug=100:200:11"
TARGETS = ("example1", "example2", "table1", "fig4", "fig5")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ parsing


def parse_float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise UsageError("empty list")
    return values


def parse_range(text):
    """``a:b:n`` (inclusive linspace) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad range {text!r}: expected MIN:MAX:N or a number") from None
    if lo > hi:
        raise UsageError(f"bad range {text!r}: min > max")
    if n < 1:
        raise UsageError(f"bad range {text!r}: N must be >= 1")
    return np.linspace(lo, hi, n)


def parse_grid(spec):
    """``ixx_aug=a:b:n,iyy=...,izz_aug=...`` into three axes."""
    axes = {}
    for item in spec.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in GRID_AXES:
            raise UsageError(f"bad grid entry {item!r}: expected one of {', '.join(GRID_AXES)}")
        if key in axes:
            raise UsageError(f"grid axis {key} given twice")
        axes[key] = parse_range(value.strip())
    missing = [k for k in GRID_AXES if k not in axes]
    if missing:
        raise UsageError(f"grid is missing {', '.join(missing)}")
    return [axes[k] for k in GRID_AXES]


def _positive(name):
    def convert(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (value > 0 and math.isfinite(value)):
            raise argparse.ArgumentTypeError(f"{name} must be > 0")
        return value

    return convert


def _out_dir(args):
    return Path(args.out or os.environ.get("SPINLAB_OUT") or ".")


# ---------------------------------------------------------------- reporting


def stability_line(p):
    line = f"{p.stability.value}, sigma={p.sigma:.6g}, lambda={p.lam:.6g}"
    if p.flags:
        line += f" [{', '.join(p.flags)}]"
    return line


def stability_report(cfg):
    p = derive_params(cfg)
    return {"config": cfg.to_dict(), "params": p.as_dict(), "summary": stability_line(p)}


def compare_runs(cfg, tau_end, dt, windows, models=("full", "analytic")):
    """Error rows of ``models[1]`` against ``models[0]`` per window."""
    with ThreadPoolExecutor(max_workers=2) as pool:
        ref, test = pool.map(lambda m: propagate(cfg, m, tau_end, dt), models)
    return ref, test, [error_report(ref, test, w).as_row() for w in windows]


def gamma_sweep(cfg, gammas, tau_end, dt):
    """MRE of the closed form against the full model as ``ixy`` scales ``gamma``.

    Inertia ratios are held fixed; only ``ixy = gamma * (ibr + izz)`` moves.
    """

    def one(g):
        c = cfg.replace(ixy=g * (cfg.platform.ibr + cfg.spin.izz))
        p = derive_params(c)
        ref = propagate(c, "full", tau_end, dt)
        test = propagate(c, "analytic", tau_end, dt)
        rep = error_report(ref, test)
        return {"gamma": p.gamma, "epsilon": p.epsilon, "mre": rep.mre, "rmse": rep.rmse,
                "r2": rep.r2}

    with ThreadPoolExecutor() as pool:
        rows = list(pool.map(one, gammas))
    return sorted(rows, key=lambda r: abs(r["epsilon"]))


def sweep_rows(rows):
    return [
        {"ixx_aug": r.ixx_aug, "iyy": r.iyy, "izz_aug": r.izz_aug, "sigma": r.sigma,
         "lambda": r.lam, "eps_n": r.eps_n}
        for r in rows
    ]


def _print_table(rows, columns):
    print("  ".join(f"{c:>12}" for c in columns))
    for row in rows:
        print("  ".join(f"{row[c]:>12.6g}" if isinstance(row[c], float) else f"{row[c]:>12}"
                        for c in columns))


# ---------------------------------------------------------------- commands


def cmd_stability(args):
    cfg = load_config(args.config)
    report = stability_report(cfg)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for key, value in report["params"].items():
            print(f"{key:>18} = {value}")
        print(report["summary"])
    return STABILITY_EXIT[derive_params(cfg).stability]


def cmd_simulate(args):
    cfg = load_config(args.config)
    traj = propagate(cfg, args.model, args.tau_end, args.dt)
    out = _out_dir(args) / (args.name or f"trajectory_{args.model}.csv")
    write_trajectory_csv(traj, out, seconds=args.seconds)
    print(f"wrote {len(traj)} rows to {out}")
    return 0


def cmd_compare(args):
    cfg = load_config(args.config)
    windows = (parse_float_list(args.windows) if args.windows
               else [args.tau_end / 3, 2 * args.tau_end / 3, args.tau_end])
    if max(windows) > args.tau_end + 1e-9:
        raise UsageError("windows must not exceed --tau-end")
    models = tuple(args.models.split(","))
    if len(models) != 2 or not set(models) <= {"full", "first", "analytic"}:
        raise UsageError("--models expects REF,TEST from full, first, analytic")
    out = _out_dir(args)
    _, _, rows = compare_runs(cfg, args.tau_end, args.dt, windows, models)
    write_rows_csv(rows, out / "errors.csv", ERROR_COLUMNS)
    _print_table(rows, ERROR_COLUMNS)
    if args.gammas:
        grows = gamma_sweep(cfg, parse_float_list(args.gammas), args.tau_end, args.dt)
        write_rows_csv(grows, out / "epsilon_errors.csv")
        _print_table(grows, list(grows[0]))
    return 0


def cmd_sweep(args):
    axes = parse_grid(args.grid)
    rows, skipped = nutation_sweep(*axes, gamma=args.gamma)
    out = _out_dir(args) / "sweep.csv"
    write_rows_csv(sweep_rows(rows), out, SWEEP_COLUMNS)
    print(f"wrote {len(rows)} rows to {out}; skipped {skipped} non-stable grid points")
    return 0


def _bundle_example(cfg, out, tau_end, dt, windows):
    save_config(cfg, out / "config.json")
    write_json(stability_report(cfg), out / "stability.json")
    ref, test, rows = compare_runs(cfg, tau_end, dt, windows)
    write_trajectory_csv(ref, out / "full.csv")
    write_trajectory_csv(test, out / "analytic.csv")
    write_rows_csv(rows, out / "errors.csv", ERROR_COLUMNS)
    return rows


def reproduce(target, out, dt=DEFAULT_DT):
    """Write the artifact bundle for ``target`` into ``out``; returns a summary dict."""
    out = Path(out)
    if target in ("example1", "example2"):
        cfg = EXAMPLE1 if target == "example1" else EXAMPLE2
        rows = _bundle_example(cfg, out, 100.0, dt, (33.0, 66.0, 100.0))
        summary = {"target": target, "stability": stability_line(derive_params(cfg)),
                   "errors": rows}
    elif target == "table1":
        save_config(EXAMPLE1, out / "config.json")
        _, _, rows = compare_runs(EXAMPLE1, 300.0, dt, (100.0, 200.0, 300.0))
        write_rows_csv(rows, out / "table1.csv", ERROR_COLUMNS)
        summary = {"target": target, "errors": rows,
                   "mre_300_within_0.02": rows[-1]["mre"] <= 0.02}
    elif target == "fig4":
        save_config(FIG4, out / "config.json")
        p = derive_params(FIG4)
        rows, skipped = nutation_sweep(*parse_grid(FIG4_GRID), gamma=p.gamma)
        write_rows_csv(sweep_rows(rows), out / "sweep.csv", SWEEP_COLUMNS)
        prof = nutation_profile(p)
        write_json(prof.__dict__, out / "nutation.json")
        with ThreadPoolExecutor(max_workers=2) as pool:
            trajs = list(pool.map(lambda m: propagate(FIG4, m, 320.0, dt), ("full", "analytic")))
        for traj in trajs:
            write_trajectory_csv(traj.decimate(10), out / f"{traj.model}.csv")
        summary = {"target": target, "theta_z0": prof.theta_z0, "eps_n": prof.eps_n,
                   "sweep_rows": len(rows), "sweep_skipped": skipped}
    elif target == "fig5":
        runs = {
            "marginal_first": (MARGINAL, "first", 100.0),
            "marginal_full": (MARGINAL, "full", 100.0),
            "unstable_first": (UNSTABLE, "first", 700.0),
        }
        save_config(MARGINAL, out / "marginal_config.json")
        save_config(UNSTABLE, out / "unstable_config.json")
        labels = {}
        with ThreadPoolExecutor() as pool:
            trajs = dict(zip(runs, pool.map(lambda r: propagate(r[0], r[1], r[2], dt),
                                            runs.values())))
        for name, traj in trajs.items():
            p = derive_params(traj.config)
            lo = 5.0 / p.lam if p.lam > 0 else 0.0
            fit = growth_envelope(traj, window=(lo, float(traj.tau[-1])))
            labels[name] = {"growth": fit.kind.value, "rate": fit.rate, "r2": fit.r2,
                            "stability": p.stability.value}
            write_trajectory_csv(traj.decimate(10), out / f"{name}.csv")
        summary = {"target": target, "runs": labels}
    else:
        raise UsageError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    write_json(summary, out / "summary.json")
    return summary


def cmd_reproduce(args):
    summary = reproduce(args.target, _out_dir(args) / args.target, args.dt)
    print(json.dumps(summary, indent=2, default=str))
    return 0


# -------------------------------------------------------------------- main


def build_parser():
    parser = _Parser(prog="spinlab", description=(
        "Attitude dynamics of a spacecraft with an asymmetric platform and an "
        "unbalanced rotor."))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config=True, run=True):
        if config:
            p.add_argument("--config", required=True, metavar="PATH", help="JSON config file")
        if run:
            p.add_argument("--tau-end", type=_positive("--tau-end"), default=100.0, metavar="F")
            p.add_argument("--dt", type=_positive("--dt"), default=DEFAULT_DT, metavar="F")
        p.add_argument("--out", metavar="DIR", help="output directory (default $SPINLAB_OUT or .)")

    p = sub.add_parser("stability", help="classify a configuration")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("simulate", help="write a trajectory CSV")
    common(p)
    p.add_argument("--model", choices=("full", "first", "analytic"), default="full")
    p.add_argument("--name", help="CSV file name (default trajectory_MODEL.csv)")
    p.add_argument("--seconds", action="store_true", help="append a physical-time column t")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="error table of one model against another")
    common(p)
    p.add_argument("--windows", metavar="LIST", help="comma-separated window ends in tau")
    p.add_argument("--models", default="full,analytic", metavar="REF,TEST")
    p.add_argument("--gammas", metavar="LIST", help="also sweep the coupling over these gamma values")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="relative nutation amplitude over an inertia grid")
    common(p, config=False, run=False)
    p.add_argument("--grid", required=True, metavar="SPEC",
                   help="ixx_aug=MIN:MAX:N,iyy=MIN:MAX:N,izz_aug=MIN:MAX:N")
    p.add_argument("--gamma", type=float, default=-1e-4)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="regenerate a named artifact bundle")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--dt", type=_positive("--dt"), default=DEFAULT_DT, metavar="F")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"spinlab: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except IntegrationBlowUp as exc:
        print(f"spinlab: {exc}", file=sys.stderr)
        return EX_SOFTWARE
    except ClosedFormError as exc:
        print(f"spinlab: {exc}", file=sys.stderr)
        return EX_DATAERR
    except FileNotFoundError as exc:
        print(f"spinlab: {exc.filename}: no such file", file=sys.stderr)
        return EX_DATAERR
    except ValueError as exc:
        print(f"spinlab: invalid input: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"spinlab: {exc}", file=sys.stderr)
        return EX_IOERR


if __name__ == "__main__":
    sys.exit(main())
