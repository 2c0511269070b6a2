"""Dense linear-algebra kernels and polynomial root finding.

Everything here works on plain ``numpy`` arrays. Matrices are 2-D float
arrays, polynomial coefficients are 1-D arrays in descending powers.
"""

from typing import Callable, NamedTuple

import numpy as np

from blinddeconv import tolerances as tol
from blinddeconv.errors import AdmissibilityError, ConvergenceError


class SymEigen(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns


def _as_symmetric(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, np.abs(A).max(initial=0.0))
    if np.abs(A - A.T).max(initial=0.0) > tol.SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric")
    return A


def jacobi_eigh(A):
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius mass
    drops below ``JACOBI_OFFDIAG_RTOL * |A|_F``.

    Returns
    -------
    SymEigen
        Eigenvalues in ascending order with matching eigenvector columns.
    """
    A = _as_symmetric(A).copy()
    n = A.shape[0]
    V = np.eye(n)
    target = tol.JACOBI_OFFDIAG_RTOL * np.linalg.norm(A)
    for _ in range(tol.JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                g = 100.0 * abs(apq)
                if abs(A[p, p]) + g == abs(A[p, p]) and abs(A[q, q]) + g == abs(A[q, q]):
                    # negligible next to both diagonal entries
                    A[p, q] = A[q, p] = 0.0
                    continue
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                colp, colq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp, rowq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(
            "Jacobi sweeps did not converge",
            {"offdiag": off, "target": target},
        )
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return SymEigen(w[order], V[:, order])


def sym_eig(A, method="lapack"):
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending.

    ``method="lapack"`` calls ``numpy.linalg.eigh`` on the symmetrized input
    (the fast path every solver iteration uses); ``method="jacobi"`` runs
    :func:`jacobi_eigh`.
    """
    A = _as_symmetric(A)
    if method == "jacobi":
        return jacobi_eigh(A)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return SymEigen(w, V)


def singular_values(A):
    """Singular values of ``A`` in ascending order."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be 2-D")
    if not np.all(np.isfinite(A)):
        raise ValueError("A has non-finite entries")
    if A.size == 0:
        return np.zeros(0)
    return np.sort(np.linalg.svd(A, compute_uv=False))


def schatten_norm(A, p):
    """Schatten p-norm: the l^p norm of the singular values, p in [1, inf]."""
    if not p >= 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    s = singular_values(A)
    if s.size == 0:
        return 0.0
    if np.isinf(p):
        return float(s[-1])
    return float(np.sum(s**p) ** (1.0 / p))


def psd_project(A):
    """Nearest positive semidefinite matrix in Frobenius norm."""
    w, V = sym_eig(A)
    X = (V * np.maximum(w, 0.0)) @ V.T
    return 0.5 * (X + X.T)


def poly_roots(coefficients):
    """All complex roots of a polynomial given in descending powers.

    ``(1, -2)`` is ``z - 2``. Uses Aberth-Ehrlich simultaneous iteration
    followed by one Newton polish per root. Trailing zero coefficients
    produce exact zero roots; multiplicities appear as repeated entries.
    """
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    scale = max(1.0, np.abs(c).max())
    if abs(c[0]) <= tol.ADMISSIBLE_RTOL * scale:
        raise AdmissibilityError("leading coefficient is zero")

    n_zero = 0
    while c.size > 1 and c[-1] == 0.0:
        c = c[:-1]
        n_zero += 1
    zeros_at_origin = np.zeros(n_zero, dtype=complex)
    degree = c.size - 1
    if degree == 0:
        return zeros_at_origin
    if degree == 1:
        return np.concatenate([[complex(-c[1] / c[0])], zeros_at_origin])

    c = c / c[0]
    dc = np.polyder(c)
    # circle whose radius is the geometric mean of the root moduli
    radius = abs(c[-1]) ** (1.0 / degree)
    angles = 2.0 * np.pi * np.arange(degree) / degree + 0.4
    z = radius * np.exp(1j * angles)

    converged = False
    for it in range(tol.ABERTH_MAX_ITER):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, p)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= tol.ABERTH_STEP_RTOL * (1.0 + np.abs(z))):
            converged = True
            break

    # one Newton polish, kept only where it lowers the residual
    p = np.polyval(c, z)
    dp = np.polyval(dc, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        z_new = np.where(dp != 0, z - p / dp, z)
    keep = np.isfinite(z_new) & (np.abs(np.polyval(c, z_new)) < np.abs(p))
    z = np.where(keep, z_new, z)

    resid = np.abs(np.polyval(c, z))
    allowed = tol.ROOT_RESIDUAL_RTOL * (1.0 + np.abs(z)) ** degree * np.abs(c).sum()
    if not converged and np.any(resid > allowed):
        raise ConvergenceError(
            "Aberth iteration did not converge",
            {"roots": z, "residuals": resid, "iterations": it + 1},
        )
    return np.concatenate([z, zeros_at_origin])


def opnorm_estimate(
    apply: Callable[[np.ndarray], np.ndarray],
    apply_adjoint: Callable[[np.ndarray], np.ndarray],
    dim_in: int,
    iterations: int = tol.OPNORM_ITERATIONS,
    seed: int = 0,
) -> float:
    """Largest singular value of a linear operator by power iteration.

    Iterates on the normal operator ``apply_adjoint(apply(.))`` starting
    from a seeded Gaussian vector. The returned value is the running
    maximum of ``|apply(v)|`` over the unit iterates, so it never decreases
    as ``iterations`` grows.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim_in)
    v /= np.linalg.norm(v)
    best = 0.0
    for _ in range(max(1, iterations)):
        Av = np.asarray(apply(v), dtype=float).ravel()
        best = max(best, float(np.linalg.norm(Av)))
        w = np.asarray(apply_adjoint(Av), dtype=float).ravel()
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    return best
