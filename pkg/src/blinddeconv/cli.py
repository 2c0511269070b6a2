"""Command-line interface.

Subcommands: gen, measure, bounds, solve, sweep, certify, selftest.
Exit codes: 0 ok, 1 usage, 2 generation, 3 input, 4 selftest failure,
5 solver non-convergence with ``--strict``.
"""

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from blinddeconv.errors import (
    AdmissibilityError,
    DegenerateBoundError,
    ExtractionError,
    GenerationError,
    UndefinedBoundError,
)
from blinddeconv.measurement import (
    add_noise,
    build_ensemble,
    measure_pair,
    measurement_from_json,
    measurement_to_json,
)
from blinddeconv.signals import SignalPair, random_pair, zero_separation
from blinddeconv.solver import (
    SolverOptions,
    aligned_error,
    extract_signal,
    matrix_error,
    solve_denoised,
)
from blinddeconv.stability import bounds_report, stability_constant, universal_bound
from blinddeconv.sylvester import certificate_coefficients, dual_certificates

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_GENERATION, EXIT_INPUT, EXIT_SELFTEST, EXIT_NONCONVERGED = range(6)

SWEEP_HEADER = [
    "seed", "L1", "L2", "delta", "delta_minus", "sigma", "noise_norm",
    "residual", "matrix_error", "C_thm2", "C_universal", "bound_satisfied",
]


class InputError(Exception):
    """Unreadable or malformed input file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _read_pair(path):
    try:
        return SignalPair.from_json(_read_json(path))
    except (ValueError, AdmissibilityError) as exc:
        raise InputError(f"bad signal file {path}: {exc}") from exc


def _emit(obj, out):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


# gen / measure / bounds / certify


def cmd_gen(args):
    pair = random_pair(args.l1, args.l2, min_delta=args.min_delta, seed=args.seed)
    _emit(pair.to_json(), args.out)
    return EXIT_OK


def cmd_measure(args):
    pair = _read_pair(args.signal_file)
    b, noise_norm = add_noise(measure_pair(pair), args.sigma, seed=args.seed)
    _emit(measurement_to_json(pair.L1, pair.L2, b, args.sigma, args.seed, noise_norm), args.out)
    return EXIT_OK


def cmd_bounds(args):
    pair = _read_pair(args.signal_file)
    _emit(bounds_report(pair, samples=args.samples, seed=args.seed).to_json(), args.out)
    return EXIT_OK


def certify_report(pair):
    """Certificate diagnostics of the unit-norm pair."""
    p = pair.normalized()
    cert = dual_certificates(p, build_ensemble(p.L1, p.L2))
    W_fro = float(np.linalg.norm(cert.W))
    Wx = float(np.linalg.norm(cert.W @ p.x))
    lam = cert.eigenvalues_W
    rank = int(np.sum(lam > 1e-8))
    omega_l1 = float(np.abs(certificate_coefficients(p)).sum())
    prop_i = bool(cert.omega_residual <= 1e-10 and lam[0] >= -1e-10)
    prop_ii = bool(Wx <= 1e-10 * max(W_fro, 1.0))
    prop_iii = bool(cert.lambda2_W > 1e-8)
    return {
        "N": p.N,
        "norm": pair.norm,
        "lambda1_W": cert.lambda1_W,
        "lambda2_W": cert.lambda2_W,
        "lambda2_Wminus": cert.lambda2_Wminus,
        "W_fro": W_fro,
        "Wx_norm": Wx,
        "rank_W": rank,
        "omega_residual": cert.omega_residual,
        "omega_l1": omega_l1,
        "property_i_psd_in_range": prop_i,
        "property_ii_nullspace": prop_ii,
        "property_iii_rank": prop_iii,
        "passed": prop_i and prop_ii and prop_iii,
    }


def cmd_certify(args):
    _emit(certify_report(_read_pair(args.signal_file)), args.out)
    return EXIT_OK


# solve


def _solver_options(args):
    try:
        return SolverOptions(max_iterations=args.max_iters, tolerance=args.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_solve(args):
    try:
        L1, L2, b = measurement_from_json(_read_json(args.measurement_file))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    truth = _read_pair(args.ground_truth) if args.ground_truth else None
    if truth is not None and (truth.L1, truth.L2) != (L1, L2):
        raise InputError("ground truth dimensions do not match the measurement")
    report = solve_denoised(build_ensemble(L1, L2), b, _solver_options(args))
    try:
        x1_hat, x2_hat, _ = extract_signal(report.X_hat, L1, L2)
    except ExtractionError:
        x1_hat, x2_hat = np.zeros(L1), np.zeros(L2)
    out = {
        "converged": report.converged,
        "iterations": report.iterations_used,
        "residual": report.residual,
        "matrix_error": None,
        "aligned_error": None,
        "x1_hat": [float(v) for v in x1_hat],
        "x2_hat": [float(v) for v in x2_hat],
    }
    if truth is not None:
        out["matrix_error"] = matrix_error(report.X_hat, truth)
        out["aligned_error"] = aligned_error(np.concatenate([x1_hat, x2_hat]), truth.x)
    _emit(out, args.out)
    if args.strict and not report.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK


# sweep


@dataclass(frozen=True)
class SweepConfig:
    L1: int = 3
    L2: int = 3
    trials: int = 5
    sigmas: tuple = (1e-4, 1e-3, 1e-2)
    min_delta: float = 0.3
    base_seed: int = 0
    output_path: str = ""
    max_iterations: int = SolverOptions.max_iterations
    tolerance: float = SolverOptions.tolerance

    def __post_init__(self):
        if self.L1 < 1 or self.L2 < 1:
            raise ValueError("L1 and L2 must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sigmas or any(s < 0 for s in self.sigmas):
            raise ValueError("sigmas must be a non-empty list of nonnegative numbers")
        if self.min_delta < 0:
            raise ValueError("min_delta must be >= 0")


def load_sweep_config(path):
    """Read a TOML or JSON sweep configuration."""
    try:
        if path.endswith(".toml"):
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"config {path} must be a table/object")
    known = {
        "L1", "L2", "trials", "sigmas", "min_delta", "base_seed",
        "output_path", "max_iterations", "tolerance",
    }
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    if "sigmas" in raw:
        raw["sigmas"] = tuple(float(s) for s in raw["sigmas"])
    try:
        return SweepConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid config {path}: {exc}") from exc


def sweep_trial(config, trial):
    """All rows of one trial (one signal pair, every noise level)."""
    seed = config.base_seed + trial
    pair = random_pair(config.L1, config.L2, min_delta=config.min_delta, seed=seed)
    ensemble = build_ensemble(pair.L1, pair.L2)
    options = SolverOptions(max_iterations=config.max_iterations, tolerance=config.tolerance)
    try:
        rep = zero_separation(pair)
        delta, delta_minus = rep.delta, rep.delta_minus
    except ValueError:
        delta = delta_minus = None
    try:
        c_thm2 = stability_constant(pair)
    except DegenerateBoundError:
        c_thm2 = None
    try:
        c_univ = universal_bound(pair)
    except (UndefinedBoundError, ValueError):
        c_univ = None
    b_clean = measure_pair(pair)
    rows = []
    for k, sigma in enumerate(config.sigmas):
        b, noise_norm = add_noise(b_clean, sigma, seed=seed * 100 + k)
        report = solve_denoised(ensemble, b, options)
        err = matrix_error(report.X_hat, pair)
        # |A(X_hat - x x^T)| <= residual + |n|, which replaces the 2|n| premise
        ok = c_thm2 is not None and err <= c_thm2 * (report.residual + noise_norm) / 2.0
        rows.append(
            [seed, pair.L1, pair.L2, delta, delta_minus, sigma, noise_norm,
             report.residual, err, c_thm2, c_univ, ok]
        )
    return rows


def _trial_job(job):
    return sweep_trial(*job)


def run_sweep(config, jobs=1):
    """Rows of the sweep, in trial order regardless of ``jobs``."""
    tasks = [(config, t) for t in range(config.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_trial = list(pool.map(_trial_job, tasks))
    else:
        per_trial = [_trial_job(t) for t in tasks]
    return [row for rows in per_trial for row in rows]


def sweep_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def cmd_sweep(args):
    config = load_sweep_config(args.config) if args.config else SweepConfig()
    overrides = {
        "L1": args.l1, "L2": args.l2, "trials": args.trials,
        "min_delta": args.min_delta, "base_seed": args.seed, "output_path": args.out,
        "max_iterations": args.max_iters, "tolerance": args.tol,
    }
    if args.sigma:
        overrides["sigmas"] = tuple(args.sigma)
    merged = {f.name: getattr(config, f.name) for f in fields(SweepConfig)}
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = SweepConfig(**merged)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    text = sweep_csv(run_sweep(config, jobs=args.jobs))
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selftest(args):
    from blinddeconv.selftest import run_selftest

    return EXIT_OK if run_selftest(sys.stdout) else EXIT_SELFTEST


def build_parser():
    parser = _Parser(prog="blinddeconv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="draw a random admissible signal pair")
    p.add_argument("--l1", type=int, required=True)
    p.add_argument("--l2", type=int, required=True)
    p.add_argument("--min-delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("measure", help="correlation measurements of a signal file")
    p.add_argument("signal_file")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("bounds", help="stability bounds of a signal file")
    p.add_argument("signal_file")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("solve", help="recover the lifted signal from a measurement file")
    p.add_argument("measurement_file")
    p.add_argument("--ground-truth")
    p.add_argument("--max-iters", type=int, default=SolverOptions.max_iterations)
    p.add_argument("--tol", type=float, default=SolverOptions.tolerance)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="noise sweep to CSV")
    p.add_argument("--config")
    p.add_argument("--l1", type=int)
    p.add_argument("--l2", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--sigma", type=float, action="append")
    p.add_argument("--min-delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="dual certificate checks of a signal file")
    p.add_argument("signal_file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("selftest", help="run the invariant battery")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, AdmissibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
