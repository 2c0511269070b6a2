"""Sylvester, banded Toeplitz, Hankel and Vandermonde matrices.

Also builds the dual certificate ``W = S^T S`` of a signal pair, its
reflected counterpart ``W_minus``, and closed-form lower bounds on the
smallest singular value of a classic Sylvester matrix.

Polynomials are given as signals: ``a = (a_0, ..., a_n)`` stands for the
degree-``n`` polynomial ``a_0 z^n + a_1 z^{n-1} + ... + a_n`` whose roots
are the z-domain zeros of the signal.
"""

from dataclasses import dataclass, field

import numpy as np

from blinddeconv import tolerances as tol
from blinddeconv.errors import AdmissibilityError, DegenerateBoundError
from blinddeconv.measurement import adjoint
from blinddeconv.numerics import singular_values, sym_eig
from blinddeconv.signals import as_signal, autocorrelation, correlate, is_nonzero, reverse, zeros


def banded_toeplitz(x, cols):
    """Convolution matrix: ``banded_toeplitz(x, cols) @ y == convolve(x, y)``."""
    x = as_signal(x, "x")
    if cols < 1:
        raise ValueError("cols must be >= 1")
    T = np.zeros((x.size + cols - 1, cols))
    for j in range(cols):
        T[j : j + x.size, j] = x
    return T


def reversal_matrix(n):
    """The ``n x n`` anti-identity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.eye(n)[::-1].copy()


def hankel_from(x, cols):
    """Hankel matrix ``T R`` with ``hankel_from(x, c) @ y == convolve(x, reverse(y))``."""
    return banded_toeplitz(x, cols) @ reversal_matrix(cols)


def _check_leading(a, name):
    a = as_signal(a, name)
    if not is_nonzero(a[0], a):
        raise AdmissibilityError(f"{name} must have a nonzero leading coefficient")
    return a


def sylvester_classic(a, b):
    """The ``(n+m) x (n+m)`` Sylvester matrix ``[T_m(a) | T_n(b)]``.

    ``n = len(a) - 1`` and ``m = len(b) - 1``; the first ``m`` columns are
    down shifts of ``a``, the last ``n`` are down shifts of ``b``.
    """
    a = _check_leading(a, "a")
    b = _check_leading(b, "b")
    n, m = a.size - 1, b.size - 1
    if n + m == 0:
        raise ValueError("at least one polynomial must have positive degree")
    blocks = []
    if m > 0:
        blocks.append(banded_toeplitz(a, m))
    if n > 0:
        blocks.append(banded_toeplitz(b, n))
    return np.hstack(blocks)


def resultant(a, b):
    """``|a_0^m b_0^n prod (beta_l - alpha_k)|`` over all root pairs."""
    a = _check_leading(a, "a")
    b = _check_leading(b, "b")
    n, m = a.size - 1, b.size - 1
    alpha, beta = zeros(a), zeros(b)
    diffs = np.abs(beta[:, None] - alpha[None, :])
    # accumulate in log space; many factors can over- or underflow
    if np.any(diffs == 0):
        return 0.0
    log_r = m * np.log(abs(a[0])) + n * np.log(abs(b[0])) + np.log(diffs).sum()
    return float(np.exp(log_r))


def _normalized_pair(a, b):
    a = _check_leading(a, "a")
    b = _check_leading(b, "b")
    s = np.sqrt(a @ a + b @ b)
    return a / s, b / s


def _delta(alpha, beta):
    if alpha.size == 0 or beta.size == 0:
        raise ValueError("both polynomials need positive degree")
    return float(np.abs(alpha[:, None] - beta[None, :]).min())


def sigma_min_bound_classic(a, b):
    """``|a_0|^m |b_0|^n delta^{nm}`` for the pair scaled to unit joint norm."""
    a, b = _normalized_pair(a, b)
    n, m = a.size - 1, b.size - 1
    delta = _delta(zeros(a), zeros(b))
    if delta <= 0.0:
        raise DegenerateBoundError("common zero: delta = 0")
    return float(abs(a[0]) ** m * abs(b[0]) ** n * delta ** (n * m))


def _has_repeated(a, roots):
    if roots.size < 2:
        return False
    d = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(d, np.inf)
    if d.min() <= tol.SIMPLE_ROOT_TOL:
        return True
    deriv = np.abs(np.polyval(np.polyder(a), roots))
    scale = np.abs(a).sum() * np.maximum(1.0, np.abs(roots)) ** (roots.size - 1)
    return bool(np.any(deriv <= tol.MULTIPLE_ROOT_DERIV_RTOL * scale))


def sigma_min_bound_vandermonde(a, b):
    """Vandermonde-based lower bound on the smallest singular value.

    Requires simple roots. With ``N = n + m`` and ``a = |a_0|/(|a_0|+1)``
    (likewise ``b``) on the unit-norm pair, the bound is

        delta^{N-1} |a_0 b_0| / N^2 * min((a/2)^{n-1}, (b/2)^{m-1}) / (a^{1-N} + b^{1-N}).
    """
    a, b = _normalized_pair(a, b)
    n, m = a.size - 1, b.size - 1
    N = n + m
    alpha, beta = zeros(a), zeros(b)
    if _has_repeated(a, alpha) or _has_repeated(b, beta):
        raise DegenerateBoundError("repeated roots: the Vandermonde bound needs simple roots")
    delta = _delta(alpha, beta)
    if delta <= 0.0:
        raise DegenerateBoundError("common zero: delta = 0")
    ra = abs(a[0]) / (abs(a[0]) + 1.0)
    rb = abs(b[0]) / (abs(b[0]) + 1.0)
    gamma2 = min((ra / 2.0) ** (n - 1), (rb / 2.0) ** (m - 1))
    gamma1 = 1.0 / (ra ** (1 - N) + rb ** (1 - N))
    return float(delta ** (N - 1) * abs(a[0] * b[0]) / N**2 * gamma2 * gamma1)


def vandermonde(nodes):
    """Complex Vandermonde matrix, row ``i`` = powers ``0..len-1`` of node ``i``."""
    nodes = np.asarray(nodes, dtype=complex).ravel()
    if nodes.size == 0:
        raise ValueError("nodes must be non-empty")
    return nodes[:, None] ** np.arange(nodes.size)[None, :]


def vandermonde_factorization(a, b):
    """Both sides of the Sylvester/Vandermonde identity.

    With ``zeta = [beta, alpha]`` returns ``(lhs, rhs)`` where
    ``lhs = V_zeta R_N S_{a,b}`` and
    ``rhs = diag(a(beta), b(alpha)) blockdiag(V_beta R_m, V_alpha R_n)``.
    """
    a = _check_leading(a, "a")
    b = _check_leading(b, "b")
    n, m = a.size - 1, b.size - 1
    N = n + m
    alpha, beta = zeros(a), zeros(b)
    zeta = np.concatenate([beta, alpha])
    lhs = vandermonde(zeta) @ reversal_matrix(N) @ sylvester_classic(a, b)
    diag = np.concatenate([np.polyval(a, beta), np.polyval(b, alpha)])
    blocks = np.zeros((N, N), dtype=complex)
    if m:
        blocks[:m, :m] = vandermonde(beta) @ reversal_matrix(m)
    if n:
        blocks[m:, m:] = vandermonde(alpha) @ reversal_matrix(n)
    return lhs, diag[:, None] * blocks


@dataclass(frozen=True)
class SylvesterBundle:
    S: np.ndarray
    S_minus: np.ndarray
    S0: np.ndarray


def _lifted(first, second, L1, L2):
    top = np.hstack([banded_toeplitz(first, L1), banded_toeplitz(-second, L2)])
    return np.vstack([top, np.zeros((1, L1 + L2))])


def sylvester_lifted(pair):
    """``N x N`` Sylvester matrices of a pair, each with a zero last row.

    ``S @ [y1, y2] = [x2 * y1 - x1 * y2, 0]``; ``S_minus`` uses
    ``reverse(x2)`` in place of ``x2``; ``S0`` drops the last row and column of ``S``.
    """
    L1, L2 = pair.L1, pair.L2
    S = _lifted(pair.x2, pair.x1, L1, L2)
    S_minus = _lifted(reverse(pair.x2), pair.x1, L1, L2)
    return SylvesterBundle(S, S_minus, S[:-1, :-1].copy())


def reflected_signal(pair):
    """``x_minus = [x1, reverse(x2)]``, the null vector of ``W_minus``."""
    return np.concatenate([pair.x1, reverse(pair.x2)])


def _centered(a, length):
    """Autocorrelation ``a`` re-centered to ``length`` (zero padded or truncated)."""
    out = np.zeros(length)
    shift = (a.size - length) // 2
    for k in range(length):
        src = k + shift
        if 0 <= src < a.size:
            out[k] = a[src]
    return out


def certificate_coefficients(pair):
    """Coefficients ``omega`` with ``adjoint(omega) == S^T S``."""
    L1, L2 = pair.L1, pair.L2
    a1 = autocorrelation(pair.x1)
    a2 = autocorrelation(pair.x2)
    return np.concatenate(
        [
            _centered(a2, 2 * L1 - 1),
            -correlate(pair.x1, pair.x2),
            -correlate(pair.x2, pair.x1),
            _centered(a1, 2 * L2 - 1),
        ]
    )


@dataclass(frozen=True)
class CertificatePair:
    W: np.ndarray
    W_minus: np.ndarray
    eigenvalues_W: np.ndarray = field(repr=False)
    eigenvalues_W_minus: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    omega_residual: float = 0.0

    @property
    def lambda1_W(self):
        return float(self.eigenvalues_W[0])

    @property
    def lambda2_W(self):
        return float(self.eigenvalues_W[1])

    @property
    def lambda2_Wminus(self):
        return float(self.eigenvalues_W_minus[1])


def dual_certificates(pair, ensemble):
    """``W``, ``W_minus``, their spectra and the coefficients ``omega``."""
    if (ensemble.L1, ensemble.L2) != (pair.L1, pair.L2):
        raise ValueError("ensemble dimensions do not match the pair")
    bundle = sylvester_lifted(pair)
    W = bundle.S.T @ bundle.S
    W_minus = bundle.S_minus.T @ bundle.S_minus
    omega = certificate_coefficients(pair)
    resid = float(np.abs(adjoint(ensemble, omega) - W).max())
    return CertificatePair(
        W=W,
        W_minus=W_minus,
        eigenvalues_W=sym_eig(W).eigenvalues,
        eigenvalues_W_minus=sym_eig(W_minus).eigenvalues,
        omega=omega,
        omega_residual=resid,
    )


def smallest_singular_value(A):
    return float(singular_values(A)[0])
