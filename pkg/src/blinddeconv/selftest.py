"""Fast invariant battery behind ``blinddeconv selftest``."""

import numpy as np

from blinddeconv import tolerances as tol
from blinddeconv.measurement import adjoint, build_ensemble, forward, measure_pair
from blinddeconv.numerics import jacobi_eigh, poly_roots, psd_project, singular_values, sym_eig
from blinddeconv.signals import autocorrelation, convolve, random_pair, reverse, z_eval
from blinddeconv.solver import SolverOptions, matrix_error, solve_denoised
from blinddeconv.stability import (
    gamma_bound,
    gamma_bruteforce,
    lambda1_DplusWminus,
    mixing_system,
    stability_constant,
)
from blinddeconv.sylvester import (
    dual_certificates,
    resultant,
    sigma_min_bound_classic,
    sylvester_classic,
    sylvester_lifted,
)


def _numerics(rng):
    A = rng.standard_normal((6, 6))
    A = A + A.T
    w, Q = sym_eig(A)
    wj, _ = jacobi_eigh(A)
    B = rng.standard_normal((4, 3))
    roots = poly_roots(np.poly([1.0, -2.0, 0.5]))
    P = psd_project(A)
    yield "eig reconstruction", np.linalg.norm(Q @ np.diag(w) @ Q.T - A) <= 1e-10 * np.linalg.norm(A)
    yield "jacobi agrees with lapack", np.abs(w - wj).max() <= 1e-10 * np.abs(w).max()
    yield "singular values of transpose", np.allclose(singular_values(B), singular_values(B.T))
    yield "root round trip", np.allclose(np.sort(roots.real), [-2.0, 0.5, 1.0], atol=1e-10)
    yield "psd projection idempotent", np.abs(psd_project(P) - P).max() <= 1e-10


def _signals(rng):
    a, b = rng.standard_normal(5), rng.standard_normal(4)
    x = rng.standard_normal(6)
    yield "convolution commutes", np.abs(convolve(a, b) - convolve(b, a)).max() <= 1e-12
    yield "autocorrelation palindromic", np.abs(reverse(autocorrelation(x)) - autocorrelation(x)).max() <= 1e-12
    yield "z-transform root", abs(z_eval([1.0, -2.0], 2.0)) <= 1e-14
    ac = autocorrelation(x)
    yield "autocorrelation energy", ac @ ac >= (x @ x) ** 2 - 1e-12


def _measurement(rng):
    pair = random_pair(3, 4, seed=int(rng.integers(1 << 30)))
    ens = build_ensemble(3, 4)
    X = rng.standard_normal((7, 7))
    lam = rng.standard_normal(ens.M)
    yield "forward matches correlations", np.abs(forward(ens, np.outer(pair.x, pair.x)) - measure_pair(pair)).max() <= 1e-12
    lhs, rhs = forward(ens, X) @ lam, np.sum(X * adjoint(ens, lam))
    yield "adjointness", abs(lhs - rhs) <= 1e-10 * (1 + np.linalg.norm(X) * np.linalg.norm(lam))
    yield "sensing norms are one", all(abs(singular_values(A)[-1] - 1.0) <= 1e-12 for A in ens.matrices)


def _sylvester(rng):
    pair = random_pair(3, 3, min_delta=0.2, seed=int(rng.integers(1 << 30)))
    ens = build_ensemble(3, 3)
    cert = dual_certificates(pair, ens)
    S = sylvester_lifted(pair).S
    a, b = rng.standard_normal(4), rng.standard_normal(3)
    d = abs(np.linalg.det(sylvester_classic(a, b)))
    yield "S x = 0", np.linalg.norm(S @ pair.x) <= 1e-10 * max(1.0, np.linalg.norm(S))
    yield "adjoint(omega) = W", cert.omega_residual <= 1e-10
    yield "lambda2(W) > 0 when coprime", cert.lambda2_W > 1e-8
    yield "resultant = |det|", abs(d - resultant(a, b)) <= 1e-8 * max(d, 1e-300)
    s = np.sqrt(a @ a + b @ b)
    yield "classic bound below sigma_min", sigma_min_bound_classic(a, b) <= singular_values(sylvester_classic(a / s, b / s))[0] + 1e-9


def _stability(rng):
    pair = random_pair(3, 2, min_delta=0.2, seed=int(rng.integers(1 << 30)))
    system = mixing_system(pair)
    gb = gamma_bruteforce(pair, samples=500)
    yield "M^T M = 2(D + W_minus)", np.abs(system.gram - 2 * (system.D + system.W_minus)).max() <= 1e-10
    yield "gamma bound below sampled gamma", gamma_bound(pair) <= gb + 1e-8
    yield "eigen relaxation below sampled gamma", 0.5 * lambda1_DplusWminus(system) <= gb**2 + 1e-8
    yield "C positive", stability_constant(pair) > 0


def _solver(rng):
    pair = random_pair(2, 3, min_delta=0.3, seed=int(rng.integers(1 << 30)))
    ens = build_ensemble(2, 3)
    rep = solve_denoised(ens, measure_pair(pair), SolverOptions())
    X = np.outer(pair.x, pair.x)
    yield "noiseless recovery", matrix_error(rep.X_hat, pair) <= 1e-4 * np.linalg.norm(X)
    yield "solution PSD", sym_eig(rep.X_hat).eigenvalues[0] >= -tol.PSD_TOL
    yield "zero data gives zero", np.all(solve_denoised(ens, np.zeros(ens.M)).X_hat == 0)


SUITES = {
    "numerics": _numerics,
    "signals": _signals,
    "measurement": _measurement,
    "sylvester": _sylvester,
    "stability": _stability,
    "solver": _solver,
}


def run_selftest(stream, seed=0):
    """Run every suite, print one line per suite; ``True`` iff all pass."""
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, suite in SUITES.items():
        results = []
        try:
            for label, ok in suite(rng):
                results.append((label, bool(ok)))
        except Exception as exc:  # a crash counts as a failure of the suite
            results.append((f"crashed: {exc}", False))
        passed = sum(ok for _, ok in results)
        print(f"{name}: {passed}/{len(results)} passed", file=stream)
        for label, ok in results:
            if not ok:
                print(f"  FAIL {label}", file=stream)
        all_ok &= passed == len(results)
    print("selftest: " + ("PASS" if all_ok else "FAIL"), file=stream)
    return all_ok
