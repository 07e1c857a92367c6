"""Command-line front end.

Subcommands: simulate | lambda | kiefer | couple | beta | clt | lil |
boundary | rates | suite.  Every run writes its data files plus a manifest
(config echo, master seed, library versions, wall time, CSV content
hashes) into the output directory, which is validated for writability
before any computation starts.  Exit codes: 0 success, 1 one or more
criterion checks failed, 2 hard error (unknown subcommand, malformed
config, I/O failure).

The output directory comes from --out, overridable only by the
KIEFERLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import outputs
from .config import ConfigError, parse_config, preset, render_config
from .covariance import default_max_lag, estimate_lambda
from .dependence import beta_noise_floor, estimate_beta
from .dynamics import DEFAULT_BURN_IN, ProcessSpec, generate_trajectory
from .empirical import DyadicGrid, block_schedule, ecdf
from .errors import EstimationError, FactorizationError
from .experiments import (
    boundary_degeneracy,
    clt_marginals,
    lil_envelope,
    rates_report,
    run_suite,
)
from .gaussian import simulate_kiefer
from .seeding import derive_seed
from .transport import coupling_scaling

OUTDIR_ENV = "KIEFERLAB_OUT"


def _add_process_args(p, require=True):
    p.add_argument("--process", choices=("iid", "lsv", "linear"), required=require)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)


def _add_common(p):
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--overwrite", action="store_true")


def _spec(args) -> ProcessSpec:
    return ProcessSpec(
        kind=args.process,
        gamma=args.gamma,
        rho=args.rho,
        burn_in=args.burn_in,
        seed=args.seed,
    )


def _outdir(args):
    out = os.environ.get(OUTDIR_ENV) or args.out
    return outputs.prepare_outdir(out, overwrite=args.overwrite)


def _int_list(raw: str) -> list[int]:
    return [int(tok) for tok in raw.split(",") if tok.strip()]


def _echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _cmd_simulate(args) -> int:
    out = _outdir(args)
    t0 = time.perf_counter()
    traj = generate_trajectory(_spec(args), args.n)
    outputs.write_csv(
        out / "trajectory.csv",
        ["index", "value"],
        ((i + 1, v) for i, v in enumerate(traj.values)),
    )
    outputs.write_manifest(out, args.seed, _echo(args), time.perf_counter() - t0)
    return 0


def _lambda_pipeline(args, grid):
    """Calibration ECDF and Lambda estimate from derived-seed trajectories."""
    spec = _spec(args)
    calib = generate_trajectory(spec.with_seed(derive_seed(args.seed, 0)), args.calibration_n)
    F = ecdf(calib)
    traj = generate_trajectory(spec.with_seed(derive_seed(args.seed, 1)), args.n)
    max_lag = args.max_lag if args.max_lag else default_max_lag(args.n)
    return F, estimate_lambda(traj, F, grid, max_lag)


def _cmd_lambda(args) -> int:
    out = _outdir(args)
    t0 = time.perf_counter()
    grid = DyadicGrid(args.grid_r)
    _, lam = _lambda_pipeline(args, grid)
    outputs.write_csv(
        out / "lambda.csv",
        ["s", *[f"s={p:g}" for p in grid.points]],
        outputs.lambda_rows(lam),
    )
    outputs.write_csv(
        out / "lambda_se.csv",
        ["s", *[f"s={p:g}" for p in grid.points]],
        ((s, *lam.se[j]) for j, s in enumerate(grid.points)),
    )
    outputs.write_json(
        out / "lambda_meta.json",
        {
            "max_lag": lam.max_lag,
            "grid_r": grid.r,
            "psd_repaired": lam.psd_repaired,
            "n": args.n,
        },
    )
    outputs.write_manifest(out, args.seed, _echo(args), time.perf_counter() - t0)
    return 0


def _cmd_kiefer(args) -> int:
    out = _outdir(args)
    t0 = time.perf_counter()
    sched = block_schedule(args.l, args.epsilon)
    grid = DyadicGrid(sched.r)
    _, lam = _lambda_pipeline(args, grid)
    path = simulate_kiefer(lam, sched, derive_seed(args.seed, 3))
    outputs.write_csv(out / "kiefer.csv", ["s", "t", "K"], outputs.kiefer_rows(path))
    outputs.write_json(
        out / "kiefer_meta.json",
        {
            "L": sched.L,
            "r": sched.r,
            "m": sched.m,
            "jitter_repaired": lam.psd_repaired,
        },
    )
    outputs.write_manifest(out, args.seed, _echo(args), time.perf_counter() - t0)
    return 0


def _cmd_couple(args) -> int:
    out = _outdir(args)
    t0 = time.perf_counter()
    l_values = _int_list(args.l_values)
    r_needed = max(block_schedule(L, args.epsilon).r for L in l_values)
    grid_r = args.grid_r or r_needed
    grid = DyadicGrid(grid_r)
    args_n = argparse.Namespace(**{**vars(args), "n": args.lambda_n})
    _, lam = _lambda_pipeline(args_n, grid)
    reports = coupling_scaling(
        _spec(args),
        lam,
        l_values,
        args.epsilon,
        args.m_samples,
        derive_seed(args.seed, 2),
        calibration_n=args.calibration_n,
    )
    outputs.write_csv(
        out / "coupling.csv",
        ["L", "r", "m", "M", "w1", "w1_normalized", "control_band_lo", "control_band_hi"],
        outputs.coupling_rows(reports),
    )
    outputs.write_manifest(out, args.seed, _echo(args), time.perf_counter() - t0)
    return 0


def _cmd_beta(args) -> int:
    out = _outdir(args)
    t0 = time.perf_counter()
    spec = _spec(args)
    traj = generate_trajectory(spec.with_seed(derive_seed(args.seed, 2)), args.n)
    lags = _int_list(args.lags)
    estimates, floors = [], []
    for i, lag in enumerate(lags):
        estimates.append(estimate_beta(traj, lag, args.bins))
        floors.append(
            beta_noise_floor(traj, lag, args.bins, derive_seed(args.seed, 4, i))
        )
    outputs.write_csv(
        out / "beta.csv",
        ["lag", "beta_hat", "noise_floor", "pairs"],
        outputs.beta_rows(estimates, floors),
    )
    outputs.write_manifest(out, args.seed, _echo(args), time.perf_counter() - t0)
    return 0


def _write_experiment(out, args, report) -> int:
    outputs.write_report(out, report.name, report)
    outputs.write_manifest(out, args.seed, _echo(args), report.wall_time)
    return 0 if report.passed else 1


def _cmd_clt(args) -> int:
    out = _outdir(args)
    report = clt_marginals(
        _spec(args),
        DyadicGrid(args.grid_r),
        n=args.n,
        replicates=args.replicates,
        seed=args.seed,
        calibration_n=args.calibration_n,
        lambda_n=args.lambda_n,
        max_lag=args.max_lag or None,
    )
    return _write_experiment(out, args, report)


def _cmd_lil(args) -> int:
    out = _outdir(args)
    report = lil_envelope(
        _spec(args),
        DyadicGrid(args.grid_r),
        n_max=args.n_max,
        seed=args.seed,
        calibration_n=args.calibration_n,
        lambda_n=args.lambda_n,
        max_lag=args.max_lag or None,
    )
    return _write_experiment(out, args, report)


def _cmd_rates(args) -> int:
    out = _outdir(args)
    report = rates_report(
        _spec(args),
        s=args.s,
        n_values=_int_list(args.n_values),
        replicates=args.replicates,
        seed=args.seed,
        calibration_n=args.calibration_n,
    )
    return _write_experiment(out, args, report)


def _cmd_boundary(args) -> int:
    out = _outdir(args)
    report = boundary_degeneracy(
        DyadicGrid(args.grid_r),
        n_values=_int_list(args.n_values),
        replicates=args.replicates,
        seed=args.seed,
        calibration_n=args.calibration_n,
    )
    return _write_experiment(out, args, report)


def _cmd_suite(args) -> int:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("suite requires exactly one of --config or --preset")
    if args.config:
        config = parse_config(Path(args.config).read_text())
    else:
        config = preset(args.preset)
    if args.seed is not None:
        config = type(config)(
            **{**config.__dict__, "master_seed": args.seed}
        )
    out_path = os.environ.get(OUTDIR_ENV) or args.out or config.output_dir
    out = outputs.prepare_outdir(out_path, overwrite=args.overwrite)
    t0 = time.perf_counter()
    echo = render_config(config)
    reports = []
    status = 0
    try:
        reports = run_suite(config)
    finally:
        # Partial reports persist even when an experiment hard-errors.
        for idx, report in enumerate(reports):
            outputs.write_report(out, f"{idx:02d}_{report.name}", report)
    for report in reports:
        if not report.passed:
            status = 1
        line = "PASS" if report.passed else "FAIL"
        print(f"{report.name}: {line}")
    outputs.write_manifest(
        out, config.master_seed, echo, time.perf_counter() - t0,
        extra={"reports": [r.name for r in reports]},
    )
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kieferlab",
        description="Empirical-process simulation lab for weakly dependent sequences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate one trajectory")
    _add_process_args(p)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("lambda", help="estimate the long-run covariance matrix")
    _add_process_args(p)
    p.add_argument("--n", type=int, default=2**20)
    p.add_argument("--grid-r", type=int, default=3)
    p.add_argument("--max-lag", type=int, default=0, help="0 = ceil(n**(1/3))")
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_lambda)

    p = sub.add_parser("kiefer", help="simulate the skeleton Kiefer path")
    _add_process_args(p)
    p.add_argument("--l", type=int, required=True, help="dyadic horizon exponent L")
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--n", type=int, default=2**20, help="lambda-estimation length")
    p.add_argument("--max-lag", type=int, default=0)
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_kiefer)

    p = sub.add_parser("couple", help="block-vs-Gaussian Wasserstein scaling")
    _add_process_args(p)
    p.add_argument("--l-values", type=str, required=True, help="comma list, e.g. 10,20")
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--m-samples", type=int, default=512)
    p.add_argument("--grid-r", type=int, default=0, help="0 = max schedule r")
    p.add_argument("--lambda-n", type=int, default=2**20)
    p.add_argument("--max-lag", type=int, default=0)
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("beta", help="pairwise dependence coefficient profile")
    _add_process_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lags", type=str, required=True, help="comma list")
    p.add_argument("--bins", type=int, default=16)
    _add_common(p)
    p.set_defaults(func=_cmd_beta)

    p = sub.add_parser("clt", help="CLT marginals experiment")
    _add_process_args(p)
    p.add_argument("--grid-r", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--lambda-n", type=int, default=2**20)
    p.add_argument("--max-lag", type=int, default=0)
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_clt)

    p = sub.add_parser("lil", help="iterated-logarithm envelope experiment")
    _add_process_args(p)
    p.add_argument("--grid-r", type=int, default=3)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--lambda-n", type=int, default=2**20)
    p.add_argument("--max-lag", type=int, default=0)
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_lil)

    p = sub.add_parser("boundary", help="degenerate-boundary experiment (gamma = 1/2)")
    p.add_argument("--grid-r", type=int, default=3)
    p.add_argument("--n-values", type=str, required=True)
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("rates", help="variance-growth experiment")
    _add_process_args(p)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--n-values", type=str, required=True)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--calibration-n", type=int, default=2**20)
    _add_common(p)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("suite", help="run a configured experiment list")
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--preset", type=str, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=_cmd_suite)

    return parser


def run_command(argv) -> int:
    """Dispatch one CLI invocation; returns the exit status (0/1/2)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse prints its own diagnostic; --help exits 0, errors exit 2.
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        ValueError,
        TypeError,
        OSError,
        EstimationError,
        FactorizationError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
