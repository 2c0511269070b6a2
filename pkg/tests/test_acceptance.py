"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Tolerances, ensemble sizes and time budgets are pinned below and must not
be relaxed to make a criterion pass.
"""

import time

import numpy as np
import pytest

from blinddeconv.cli import SweepConfig, main, run_sweep
from blinddeconv.measurement import (
    adjoint,
    build_ensemble,
    embed_autocorrelation_parts,
    forward,
    measure_pair,
    split_measurements,
    split_stacked_autocorrelation,
)
from blinddeconv.numerics import singular_values, sym_eig
from blinddeconv.signals import SignalPair, autocorrelation, convolve, random_pair
from blinddeconv.solver import SolverOptions, matrix_error, solve_denoised
from blinddeconv.stability import gamma_bound, gamma_bruteforce, lambda1_DplusWminus, mixing_system
from blinddeconv.sylvester import (
    dual_certificates,
    reflected_signal,
    resultant,
    sigma_min_bound_classic,
    sigma_min_bound_vandermonde,
    sylvester_classic,
    sylvester_lifted,
    vandermonde_factorization,
)
from conftest import ACCEPTANCE_LINES
from oracles import dft_direct, idft_direct, resultant_by_det

SWEEP_CONFIG = SweepConfig(L1=3, L2=3, trials=20, sigmas=(1e-4, 1e-3, 1e-2), min_delta=0.3, base_seed=0)


def verdict(number, name, ok, detail):
    line = f"ACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_1_measurement_consistency():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        L1, L2 = (int(v) for v in rng.integers(1, 9, 2))
        p = random_pair(L1, L2, seed=int(rng.integers(1 << 30)))
        ens = build_ensemble(L1, L2)
        worst = max(worst, np.abs(forward(ens, np.outer(p.x, p.x)) - measure_pair(p)).max())
    elapsed = time.perf_counter() - start
    verdict(1, "measurement consistency", worst <= 1e-12 and elapsed < 5,
            f"max dev {worst:.2e} <= 1e-12, {elapsed:.2f}s < 5s")


def test_2_adjointness():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        L1, L2 = (int(v) for v in rng.integers(1, 9, 2))
        ens = build_ensemble(L1, L2)
        X = rng.standard_normal((ens.N, ens.N))
        lam = rng.standard_normal(ens.M)
        lhs = forward(ens, X) @ lam
        rhs = np.sum(X * adjoint(ens, lam))
        worst = max(worst, abs(lhs - rhs) / max(1.0, np.linalg.norm(X) * np.linalg.norm(lam)))
    elapsed = time.perf_counter() - start
    verdict(2, "adjointness", worst <= 1e-10 and elapsed < 2,
            f"max rel dev {worst:.2e} <= 1e-10, {elapsed:.2f}s < 2s")


def test_3_dual_certificate():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    failures = []
    for i in range(100):
        L1, L2 = (int(v) for v in rng.integers(2, 6, 2))
        p = random_pair(L1, L2, min_delta=0.2, seed=int(rng.integers(1 << 30))).normalized()
        cert = dual_certificates(p, build_ensemble(L1, L2))
        checks = [
            -1e-10 <= cert.lambda1_W <= 1e-10,
            np.linalg.norm(cert.W @ p.x) <= 1e-10 * np.linalg.norm(cert.W),
            cert.lambda2_W > 1e-8,
            cert.omega_residual <= 1e-10,
            np.abs(cert.omega).sum() <= p.N,
        ]
        if not all(checks):
            failures.append(("coprime", i))
    for i in range(20):
        c = rng.standard_normal(2)
        c[0] = 1.0
        u, v = rng.standard_normal(int(rng.integers(1, 4))), rng.standard_normal(int(rng.integers(1, 4)))
        u[0] = v[0] = 1.0
        p = SignalPair(convolve(c, u), convolve(c, v)).normalized()
        if dual_certificates(p, build_ensemble(p.L1, p.L2)).lambda2_W > 1e-8:
            failures.append(("common factor", i))
    elapsed = time.perf_counter() - start
    verdict(3, "dual certificate", not failures and elapsed < 10,
            f"{len(failures)} failures over 100 coprime + 20 common-factor pairs, {elapsed:.2f}s < 10s")


def test_4_resultant():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n, m = (int(v) for v in rng.integers(1, 7, 2))
        a, b = rng.standard_normal(n + 1), rng.standard_normal(m + 1)
        d = resultant_by_det(a, b)
        worst = max(worst, abs(d - resultant(a, b)) / d)
    elapsed = time.perf_counter() - start
    verdict(4, "resultant", worst <= 1e-8 and elapsed < 2,
            f"max rel dev {worst:.2e} <= 1e-8, {elapsed:.2f}s < 2s")


def test_5_singular_value_bounds():
    rng = np.random.default_rng(5)
    violations, worst_identity = 0, 0.0
    for _ in range(100):
        L1, L2 = (int(v) for v in rng.integers(2, 8, 2))
        p = random_pair(L1, L2, min_delta=0.2, seed=int(rng.integers(1 << 30))).normalized()
        a, b = p.x1, p.x2
        n, m = L1 - 1, L2 - 1
        sv = singular_values(sylvester_classic(a, b))
        for bound in (sigma_min_bound_classic(a, b), sigma_min_bound_vandermonde(a, b)):
            violations += bound > sv[0] + 1e-9
        violations += sv[-1] > np.sqrt(n + m - 1) + 1e-9
        lhs, rhs = vandermonde_factorization(a, b)
        worst_identity = max(worst_identity, np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max()))
    verdict(5, "singular-value bounds", violations == 0 and worst_identity <= 1e-8,
            f"{violations} violations at 1e-9 slack, Vandermonde identity residual {worst_identity:.2e} <= 1e-8")


def test_6_local_rip():
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    violations, worst_ratio = 0, np.inf
    for _ in range(50):
        L1, L2 = (int(v) for v in rng.integers(2, 6, 2))
        p = random_pair(L1, L2, min_delta=0.2, seed=int(rng.integers(1 << 30)))
        gb = gamma_bruteforce(p, samples=10000)
        g = gamma_bound(p)
        system = mixing_system(p)
        xm = reflected_signal(system.pair)
        violations += g > gb
        violations += 0.5 * lambda1_DplusWminus(system) > gb**2 + 1e-8
        violations += xm @ system.D @ xm < 1 - 1e-9
        worst_ratio = min(worst_ratio, gb / g)
    elapsed = time.perf_counter() - start
    verdict(6, "local 2-RIP", violations == 0 and elapsed < 60,
            f"{violations} violations, min bruteforce/bound {worst_ratio:.1f}, {elapsed:.2f}s < 60s")


def test_7_noiseless_recovery():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst, max_iters = 0.0, 0
    options = SolverOptions(max_iterations=20000)
    for _ in range(50):
        L1, L2 = (int(v) for v in rng.integers(2, 7, 2))
        p = random_pair(L1, L2, min_delta=0.3, seed=int(rng.integers(1 << 30)))
        rep = solve_denoised(build_ensemble(L1, L2), measure_pair(p), options)
        worst = max(worst, matrix_error(rep.X_hat, p) / p.norm**2)
        max_iters = max(max_iters, rep.iterations_used)
    elapsed = time.perf_counter() - start
    verdict(7, "noiseless recovery", worst <= 1e-4 and max_iters <= 20000 and elapsed < 300,
            f"max rel error {worst:.2e} <= 1e-4, max iterations {max_iters}, {elapsed:.2f}s < 300s")


def test_8_noise_stability():
    start = time.perf_counter()
    rows = run_sweep(SWEEP_CONFIG)
    elapsed = time.perf_counter() - start
    satisfied = sum(bool(r[-1]) for r in rows)
    defined = [r for r in rows if r[10] is not None and r[9] is not None]
    ordering_bad = sum(r[9] > r[10] * (1 + 1e-8) for r in defined)
    slack = max(r[8] / (r[9] * r[6]) for r in rows if r[9] is not None and r[6] > 0)
    ok = satisfied == len(rows) == 60 and ordering_bad == 0 and elapsed < 600
    verdict(8, "noise stability", ok,
            f"{satisfied}/{len(rows)} rows within C|n| + residual slack, "
            f"{ordering_bad} ordering violations over {len(defined)} defined rows, "
            f"max error/(C|n|) {slack:.2e}, {elapsed:.2f}s < 600s")


def test_9_structural_identities():
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    worst = {"gram": 0.0, "eig": 0.0, "split": 0.0, "trace": 0.0, "dft": 0.0}
    for _ in range(30):
        L1, L2 = (int(v) for v in rng.integers(1, 7, 2))
        p = random_pair(L1, L2, seed=int(rng.integers(1 << 30)))
        system = mixing_system(p)
        worst["gram"] = max(worst["gram"], np.abs(system.gram - 2 * (system.D + system.W_minus)).max())
        S = sylvester_lifted(p).S
        worst["eig"] = max(worst["eig"], np.abs(sym_eig(S.T @ S).eigenvalues - singular_values(S) ** 2).max())
        seg = split_measurements(measure_pair(p), L1, L2)
        a = embed_autocorrelation_parts(seg["a1"], seg["a12"], seg["a21"], seg["a2"], L1, L2)
        a12, a21 = split_stacked_autocorrelation(a, seg["a1"], seg["a2"], L1, L2)
        worst["split"] = max(
            worst["split"],
            np.abs(a - autocorrelation(p.x)).max(),
            np.abs(a12 - seg["a12"]).max(),
            np.abs(a21 - seg["a21"]).max(),
        )

        def padded_autocorrelation(v):
            n = 2 * len(v) - 1
            mag2 = np.abs(dft_direct(np.concatenate([v, np.zeros(n - len(v))]))) ** 2
            return np.roll(idft_direct(mag2).real * np.sqrt(n), len(v) - 1)

        dft_a = padded_autocorrelation(p.x)
        b12, b21 = split_stacked_autocorrelation(
            dft_a, padded_autocorrelation(p.x1), padded_autocorrelation(p.x2), L1, L2
        )
        worst["dft"] = max(worst["dft"], np.abs(b12 - seg["a12"]).max(), np.abs(b21 - seg["a21"]).max())
    for _ in range(50):
        n = int(rng.integers(1, 9))
        B, C = rng.standard_normal((2, n, n))
        X, Y = B @ B.T, C @ C.T + 0.1 * np.eye(n)
        worst["trace"] = max(worst["trace"], sym_eig(Y).eigenvalues[0] * np.trace(X) - np.trace(X @ Y))
    nu = np.linspace(0.0, 1.0, 100001)
    lagrange = (2 * nu**2 - 2 * nu + 1).min()
    elapsed = time.perf_counter() - start
    ok = (
        worst["gram"] <= 1e-10
        and worst["eig"] <= 1e-9
        and worst["split"] <= 1e-12
        and abs(lagrange - 0.5) <= 1e-12
        and worst["trace"] <= 1e-10
        and worst["dft"] <= 1e-8
        and elapsed < 10
    )
    verdict(9, "structural identities", ok,
            f"gram {worst['gram']:.1e}, eig {worst['eig']:.1e}, split {worst['split']:.1e}, "
            f"min 2v^2-2v+1 = {lagrange:.12f}, trace {worst['trace']:.1e}, dft {worst['dft']:.1e}, {elapsed:.2f}s < 10s")


def test_10_determinism(tmp_path):
    outputs = []
    for name, jobs in (("first", "1"), ("second", "1"), ("parallel", "2")):
        path = tmp_path / f"{name}.csv"
        code = main(["sweep", "--l1", "2", "--l2", "3", "--trials", "3", "--sigma", "1e-3",
                     "--sigma", "1e-2", "--seed", "7", "--jobs", jobs, "--out", str(path)])
        assert code == 0
        outputs.append(path.read_bytes())
    verdict(10, "determinism", outputs[0] == outputs[1] == outputs[2],
            f"two serial runs and one 2-worker run byte-identical, {len(outputs[0])} bytes")


@pytest.mark.parametrize("field", ["L1", "L2", "trials", "sigmas", "min_delta", "base_seed"])
def test_sweep_config_pinned(field):
    pinned = {"L1": 3, "L2": 3, "trials": 20, "sigmas": (1e-4, 1e-3, 1e-2), "min_delta": 0.3, "base_seed": 0}
    assert getattr(SWEEP_CONFIG, field) == pinned[field]
