"""``geopump`` command-line interface.

Subcommands
-----------
euler       Euler class of the dark bundle on a periodic grid (JSON to stdout).
simulate    One trajectory; writes ``trace.csv``.
ensemble    Phase-averaged run; writes ``ensemble.csv`` and ``summary.json``.
scan-fib    Growth rate of the E2 spread over Fibonacci frequency ratios;
            writes ``scan.csv`` and ``scan.json``.
verify      Invariant suite; ``--list`` names the checks without running them.

Exit codes: 0 success, 2 configuration error, 3 numerical or gap error,
4 failed verification.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .drive import DriveProtocol, fibonacci_ratios, trajectory_rng
from .ensemble import default_threads, run_ensemble, sigma_slope_scan
from .errors import GeoPumpError, NumericalError, ValidationError
from .evolution import IntegratorConfig, evolve_pump
from .geometry import EVEN_INTEGER_TOL, euler_class
from .verify import CHECKS, run_checks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

TRACE_HEADER = ("t", "E1", "E2", "Ep1", "Ep2", "trans_err", "norm_err")
ENSEMBLE_HEADER = ("t", "E2_mean", "E2_sigma", "E2_analytic")
SCAN_HEADER = ("p", "q", "ratio", "sigma_slope")
SCAN_SLACK = 1.1


# -- deterministic formatting ----------------------------------------------


def fmt(x) -> str:
    """12 significant digits, C-locale, no negative zero."""
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def json_number(x):
    """Round to 12 significant digits for JSON; non-finite values become null."""
    x = float(x)
    if not math.isfinite(x):
        return None
    r = float(format(x, ".12g"))
    return 0.0 if r == 0.0 else r


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- configuration -----------------------------------------------------------

_OVERRIDES = {"m": "m", "delta": "delta", "grid": "grid", "fib_depth": "fib_depth", "seed": "seed", "out": "out", "axes": "axes"}


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {k: getattr(args, a) for a, k in _OVERRIDES.items() if getattr(args, a, None) is not None}
    return cfg.replace(**changes) if changes else cfg


def resolve_threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads", f"must be >= 1, got {args.threads}")
        return args.threads
    try:
        return default_threads()
    except ValidationError as exc:
        raise ConfigError("GEOPUMP_THREADS", str(exc)) from exc


def start_phases(cfg: RunConfig) -> np.ndarray:
    if cfg.phi0 is not None:
        return np.array(cfg.phi0, dtype=float)
    return 2 * np.pi * trajectory_rng(cfg.seed, cfg.trajectory).random(2)


# -- commands ----------------------------------------------------------------


def cmd_euler(cfg: RunConfig, out_dir: Path | None = None) -> tuple[dict, int]:
    """Euler class document and exit status (0 iff within the even-integer tolerance)."""
    data = euler_class(cfg.ensemble().model(), axes=cfg.axes_index, grid=(cfg.grid, cfg.grid))
    doc = {
        "chi": json_number(data.chi),
        "residual_to_even_integer": json_number(data.residual),
        "grid": [cfg.grid, cfg.grid],
        "axes": cfg.axes,
        "m": json_number(cfg.m),
        "delta": json_number(cfg.delta),
    }
    if out_dir is not None:
        write_atomic(out_dir / "euler.json", _json_text(doc))
    return doc, EXIT_OK if data.residual < EVEN_INTEGER_TOL else EXIT_VERIFY


def cmd_simulate(cfg: RunConfig) -> Path:
    ens = cfg.ensemble()
    model = ens.model()
    protocol = DriveProtocol(tuple(start_phases(cfg)), cfg.omega, cfg.p, cfg.q)
    trace = evolve_pump(model, protocol, ens.initial_state(), cfg.t_end, IntegratorConfig(cfg.dt, cfg.stride))
    cols = np.column_stack([trace.t, trace.energy, trace.energy_h0, trace.transitionless_err, trace.norm_err])
    path = Path(cfg.out) / "trace.csv"
    write_atomic(path, _csv_text(TRACE_HEADER, cols))
    return path


def cmd_ensemble(cfg: RunConfig, threads: int) -> tuple[Path, Path]:
    stats = run_ensemble(cfg.ensemble(), threads=threads)
    cols = np.column_stack([stats.t, stats.mean_energy[:, 1], stats.sigma_e2, stats.analytic_power * stats.t])
    summary = {
        "fitted_slope": json_number(stats.slope),
        "analytic_slope": json_number(stats.analytic_power),
        "rel_err": json_number(stats.rel_err),
        "sigma_slope": json_number(stats.sigma_slope),
        "chi12": json_number(stats.chi),
        "n_traj": cfg.n_traj,
        "seed": cfg.seed,
    }
    out = Path(cfg.out)
    csv_path, json_path = out / "ensemble.csv", out / "summary.json"
    write_atomic(csv_path, _csv_text(ENSEMBLE_HEADER, cols))
    write_atomic(json_path, _json_text(summary))
    return csv_path, json_path


def cmd_scan_fib(cfg: RunConfig, threads: int) -> tuple[list, bool]:
    ratios = fibonacci_ratios(cfg.fib_depth)
    base = cfg.ensemble(t_end=cfg.scan_t_end)
    slopes = [s for _, s in sigma_slope_scan(base, ratios, threads)]
    monotone = all(b <= SCAN_SLACK * a for a, b in zip(slopes, slopes[1:]))
    rows = [(p, q, p / q, s) for (p, q), s in zip(ratios, slopes)]
    out = Path(cfg.out)
    write_atomic(out / "scan.csv", _csv_text(SCAN_HEADER, rows))
    doc = {
        "ratios": [[p, q] for p, q in ratios],
        "sigma_slopes": [json_number(s) for s in slopes],
        "t_end": json_number(cfg.scan_t_end),
        "non_increasing_within_10pct": monotone,
    }
    write_atomic(out / "scan.json", _json_text(doc))
    return rows, monotone


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("--m", type=float, help="coupling mass parameter")
    common.add_argument("--delta", type=float, help="excited-state detuning")
    common.add_argument("--grid", type=int, help="Euler-class grid points per axis")
    common.add_argument("--axes", choices=("12", "21"), help="index pair (nu, mu) of chi_{nu mu}")
    common.add_argument("--fib-depth", dest="fib_depth", type=int, help="number of Fibonacci ratios to scan")
    common.add_argument("--seed", type=int, help="seed for the initial phases")
    common.add_argument("--threads", type=int, help="worker threads (overrides GEOPUMP_THREADS)")

    parser = argparse.ArgumentParser(prog="geopump", description="Geometric energy pumping in a driven tripod.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("euler", parents=[common], help="Euler class on a periodic grid")
    sub.add_parser("simulate", parents=[common], help="single-trajectory energy trace")
    sub.add_parser("ensemble", parents=[common], help="phase-averaged energies and fitted slope")
    sub.add_parser("scan-fib", parents=[common], help="fluctuation growth over Fibonacci ratios")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--list", action="store_true", help="print the check names and exit")
    v.add_argument("--inject-fault", action="store_true", help="flip the gauge-potential sign (suite self-test)")
    v.add_argument("--check", action="append", metavar="NAME", help="run only this check (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the config-error code
        return int(exc.code or 0)

    def fail(code: int, msg: str) -> int:
        print(f"geopump: error: {msg}", file=sys.stderr)
        return code

    try:
        if args.command == "verify" and args.list:
            for name in CHECKS:
                print(name)
            return EXIT_OK
        cfg = load_config(args)
        threads = resolve_threads(args)

        if args.command == "euler":
            out_dir = Path(args.out) if args.out is not None else None
            doc, code = cmd_euler(cfg, out_dir)
            print(_json_text(doc), end="")
            return code
        if args.command == "simulate":
            print(cmd_simulate(cfg))
            return EXIT_OK
        if args.command == "ensemble":
            csv_path, json_path = cmd_ensemble(cfg, threads)
            print(csv_path)
            print(json_path.read_text(encoding="utf-8"), end="")
            return EXIT_OK
        if args.command == "scan-fib":
            rows, monotone = cmd_scan_fib(cfg, threads)
            print("p/q\tsigma_slope")
            for p, q, _, s in rows:
                print(f"{p}/{q}\t{fmt(s)}")
            print(f"non-increasing within 10%: {'yes' if monotone else 'no'}")
            return EXIT_OK
        if args.command == "verify":
            model = cfg.ensemble().model()
            results = run_checks(args.check, model=model, fault=args.inject_fault)
            for r in results:
                print(r.line())
            return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    except ValidationError as exc:
        return fail(EXIT_CONFIG, str(exc))
    except (NumericalError, GeoPumpError, ArithmeticError) as exc:
        return fail(EXIT_NUMERICAL, str(exc))
    except OSError as exc:
        return fail(EXIT_CONFIG, f"{exc.filename or ''}: {exc.strerror}")
    return fail(EXIT_CONFIG, f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
