"""Least squares over the PSD cone by accelerated projected gradient.

Minimizes ``f(X) = 1/2 |A(X) - b|^2`` subject to ``X >= 0`` with FISTA
momentum, restarting whenever the objective goes up. Every
``polish_every`` iterations a few Gauss-Newton steps on the rank-one
factorization ``X = v v^T`` are tried from the top eigenpair of the iterate;
the result replaces the iterate only if it lowers the objective.
"""

from dataclasses import dataclass, field

import numpy as np

from blinddeconv import tolerances as tol
from blinddeconv.errors import ExtractionError
from blinddeconv.measurement import adjoint, forward, tangent_jacobian
from blinddeconv.numerics import opnorm_estimate, psd_project, sym_eig


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = tol.SOLVER_MAX_ITER
    tolerance: float = tol.SOLVER_TOL
    window: int = tol.SOLVER_STAGNATION_WINDOW
    step_safety: float = tol.SOLVER_STEP_SAFETY
    restart: bool = True
    polish_every: int = tol.SOLVER_POLISH_EVERY
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not 0 < self.step_safety <= 1:
            raise ValueError("step_safety must lie in (0, 1]")
        if self.polish_every < 0:
            raise ValueError("polish_every must be >= 0")


@dataclass(frozen=True)
class SolverReport:
    X_hat: np.ndarray
    objective_trace: list = field(repr=False)
    iterations_used: int = 0
    residual: float = 0.0
    converged: bool = False
    restarts: int = 0


def _sym(A):
    return 0.5 * (A + A.T)


def lipschitz_constant(ensemble, seed=0):
    """Squared operator norm of the measurement map, by power iteration."""
    N = ensemble.N
    norm = opnorm_estimate(
        lambda v: forward(ensemble, v.reshape(N, N)),
        lambda lam: adjoint(ensemble, lam).ravel(),
        N * N,
        seed=seed,
    )
    return norm**2


def initial_point(ensemble, b):
    """Spectral start: PSD part of ``A*(b)``, rescaled to best fit ``b``."""
    P = psd_project(_sym(adjoint(ensemble, b)))
    AP = forward(ensemble, P)
    denom = AP @ AP
    if denom == 0.0:
        return np.zeros_like(P)
    return max(0.0, (AP @ b) / denom) * P


def rank_one_polish(ensemble, b, X, steps=tol.POLISH_GN_STEPS):
    """Gauss-Newton on ``v -> 1/2 |A(v v^T) - b|^2`` from the top eigenpair of ``X``.

    Returns ``(v v^T, objective)`` or ``None`` when ``X`` has no positive
    eigenvalue.
    """
    w, V = sym_eig(_sym(X))
    if w[-1] <= 0.0:
        return None
    v = V[:, -1] * np.sqrt(w[-1])
    r = forward(ensemble, np.outer(v, v)) - b
    f = 0.5 * float(r @ r)
    for _ in range(steps):
        J = tangent_jacobian(ensemble, v)
        dv = np.linalg.lstsq(J, -r, rcond=None)[0]
        tau = 1.0
        while tau > 1e-4:
            v_try = v + tau * dv
            r_try = forward(ensemble, np.outer(v_try, v_try)) - b
            f_try = 0.5 * float(r_try @ r_try)
            if f_try < f:
                break
            tau *= 0.5
        else:
            break
        done = f - f_try <= tol.SOLVER_TOL * f
        v, r, f = v_try, r_try, f_try
        if done:
            break
    return np.outer(v, v), f


def solve_denoised(ensemble, b, options=None):
    if options is None:
        options = SolverOptions()
    b = np.asarray(b, dtype=float)
    if b.shape != (ensemble.M,):
        raise ValueError(f"b must have length {ensemble.M}, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("b has non-finite entries")

    def objective(X):
        r = forward(ensemble, X) - b
        return 0.5 * float(r @ r), r

    def grad_step(Y, r):
        return psd_project(Y - step * _sym(adjoint(ensemble, r)))

    L = lipschitz_constant(ensemble, options.seed)
    step = options.step_safety / L if L > 0 else 1.0
    floor = 0.5 * (np.finfo(float).eps * np.linalg.norm(b)) ** 2

    X = initial_point(ensemble, b)
    f, r = objective(X)
    trace = [f]
    Y, rY = X, r
    t = 1.0
    restarts = 0
    converged = f <= floor
    it = 0
    while not converged and it < options.max_iterations:
        it += 1
        X_new = grad_step(Y, rY)
        f_new, r_new = objective(X_new)
        if options.restart and f_new > f:
            # momentum overshot: plain projected step from the last iterate
            restarts += 1
            t = 1.0
            X_new = grad_step(X, r)
            f_new, r_new = objective(X_new)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if options.polish_every and it % options.polish_every == 0:
            polished = rank_one_polish(ensemble, b, X_new)
            if polished is not None and polished[1] < f_new:
                X_new, f_new = polished
                r_new = forward(ensemble, X_new) - b
                X, t_next = X_new, 1.0
        Y = X_new + ((t - 1.0) / t_next) * (X_new - X)
        rY = forward(ensemble, Y) - b
        X, f, r, t = X_new, f_new, r_new, t_next
        trace.append(f)
        if f <= floor:
            converged = True
        elif it >= options.window:
            old = trace[-1 - options.window]
            converged = old - f <= options.tolerance * old
    return SolverReport(
        X_hat=X,
        objective_trace=trace,
        iterations_used=it,
        residual=float(np.linalg.norm(r)),
        converged=bool(converged),
        restarts=restarts,
    )


def extract_signal(X_hat, L1, L2):
    """Top eigenvector scaled by ``sqrt`` of its eigenvalue, split at ``L1``.

    The sign is fixed so that the first nonzero entry is positive.
    """
    X_hat = np.asarray(X_hat, dtype=float)
    if X_hat.shape != (L1 + L2, L1 + L2):
        raise ValueError("X_hat size does not match L1 + L2")
    w, V = sym_eig(_sym(X_hat))
    lam = float(w[-1])
    if lam <= 0.0:
        raise ExtractionError(f"top eigenvalue {lam:.3g} is not positive")
    v = V[:, -1] * np.sqrt(lam)
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v[:L1].copy(), v[L1:].copy(), lam


def aligned_error(x_hat, x):
    """``min(|x_hat - x|, |x_hat + x|)``: error up to the global sign."""
    x_hat = np.asarray(x_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    if x_hat.shape != x.shape:
        raise ValueError("length mismatch")
    return float(min(np.linalg.norm(x_hat - x), np.linalg.norm(x_hat + x)))


def matrix_error(X_hat, pair):
    X_hat = np.asarray(X_hat, dtype=float)
    x = pair.x
    if X_hat.shape != (x.size, x.size):
        raise ValueError("dimension mismatch")
    return float(np.linalg.norm(X_hat - np.outer(x, x)))
