"""The lifted correlation measurement map and its adjoint.

For ``x = [x1, x2]`` the map sends ``X = x x^T`` to the stacked correlations

    b = [x1 * rev(x1), x1 * rev(x2), x2 * rev(x1), x2 * rev(x2)]

of lengths ``2L1-1, N-1, N-1, 2L2-1`` (``M = 4N - 4`` values in total).
Measurement ``(i, j, k)`` reads the ``k``-th entry of ``x_i * rev(x_j)``,
a sum along one diagonal of the ``(j, i)`` block of ``X``.
"""

from dataclasses import dataclass

import numpy as np

from blinddeconv.signals import as_signal, correlate, autocorrelation

SEGMENTS = ("a1", "a12", "a21", "a2")


def shift_matrix(Ni, Nj, k):
    """The ``Ni x Nj`` 0/1 matrix ``T`` with ``u^T T v = correlate(v, u)[k]``.

    Ones sit on the diagonal ``col - row = k - (Ni - 1)``.
    """
    if not 0 <= k <= Ni + Nj - 2:
        raise IndexError(f"shift index {k} outside [0, {Ni + Nj - 2}]")
    return np.eye(Ni, Nj, k=k - (Ni - 1))


def _blocks(L1, L2):
    """(i, j, row offset, col offset, rows, cols, count) per segment."""
    N = L1 + L2
    return [
        (1, 1, 0, 0, L1, L1, 2 * L1 - 1),
        (1, 2, L1, 0, L2, L1, N - 1),
        (2, 1, 0, L1, L1, L2, N - 1),
        (2, 2, L1, L1, L2, L2, 2 * L2 - 1),
    ]


def segment_slices(L1, L2):
    """Slices of ``b`` holding ``a1, a12, a21, a2``."""
    out, start = {}, 0
    for name, blk in zip(SEGMENTS, _blocks(L1, L2)):
        out[name] = slice(start, start + blk[-1])
        start += blk[-1]
    return out


def split_measurements(b, L1, L2):
    b = np.asarray(b, dtype=float)
    return {name: b[s] for name, s in segment_slices(L1, L2).items()}


@dataclass(frozen=True)
class SensingEnsemble:
    """All ``M = 4N - 4`` sensing matrices for block sizes ``(L1, L2)``.

    ``matrices[m]`` is the dense ``N x N`` matrix of measurement ``m``;
    ``labels[r, c]`` is the unique measurement whose matrix has a one at
    ``(r, c)``, which gives a matrix-free route for both directions.
    """

    L1: int
    L2: int
    matrices: np.ndarray
    labels: np.ndarray
    index: tuple  # (i, j, k) per measurement, lexicographic

    @property
    def N(self):
        return self.L1 + self.L2

    @property
    def M(self):
        return 4 * self.N - 4

    @property
    def counts(self):
        return tuple(blk[-1] for blk in _blocks(self.L1, self.L2))

    @property
    def weights(self):
        """Number of ones in each sensing matrix (``A A^*`` is diagonal)."""
        return np.bincount(self.labels.ravel(), minlength=self.M)


def build_ensemble(L1, L2):
    if L1 < 1 or L2 < 1:
        raise ValueError("L1 and L2 must be >= 1")
    N = L1 + L2
    M = 4 * N - 4
    mats = np.zeros((M, N, N))
    labels = np.full((N, N), -1, dtype=np.intp)
    index = []
    m = 0
    for i, j, r0, c0, rows, cols, count in _blocks(L1, L2):
        for k in range(count):
            T = shift_matrix(rows, cols, k)
            mats[m, r0 : r0 + rows, c0 : c0 + cols] = T
            rr, cc = np.nonzero(T)
            labels[r0 + rr, c0 + cc] = m
            index.append((i, j, k))
            m += 1
    assert np.all(labels >= 0)
    mats.setflags(write=False)
    labels.setflags(write=False)
    return SensingEnsemble(L1, L2, mats, labels, tuple(index))


def _check_matrix(ensemble, X):
    X = np.asarray(X, dtype=float)
    if X.shape != (ensemble.N, ensemble.N):
        raise ValueError(f"X must be {ensemble.N}x{ensemble.N}, got {X.shape}")
    return X


def _check_lambda(ensemble, lam):
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (ensemble.M,):
        raise ValueError(f"lambda must have length {ensemble.M}, got {lam.shape}")
    return lam


def forward(ensemble, X):
    """``b_m = <X, A_m>`` for every measurement, matrix-free."""
    X = _check_matrix(ensemble, X)
    return np.bincount(ensemble.labels.ravel(), weights=X.ravel(), minlength=ensemble.M)


def forward_dense(ensemble, X):
    """Same as :func:`forward`, through the materialized sensing matrices."""
    X = _check_matrix(ensemble, X)
    return np.einsum("mij,ij->m", ensemble.matrices, X)


def adjoint(ensemble, lam):
    """``sum_m lam_m A_m``, matrix-free."""
    lam = _check_lambda(ensemble, lam)
    return lam[ensemble.labels]


def adjoint_dense(ensemble, lam):
    lam = _check_lambda(ensemble, lam)
    return np.tensordot(lam, ensemble.matrices, axes=1)


def tangent_jacobian(ensemble, v):
    """Matrix ``J`` with ``J @ y == forward(v y^T + y v^T)``.

    This is the derivative of ``v -> forward(v v^T)``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (ensemble.N,):
        raise ValueError(f"v must have length {ensemble.N}")
    rows, cols = np.indices((ensemble.N, ensemble.N))
    lab = ensemble.labels.ravel()
    J = np.zeros((ensemble.M, ensemble.N))
    np.add.at(J, (lab, rows.ravel()), v[cols.ravel()])
    np.add.at(J, (lab, cols.ravel()), v[rows.ravel()])
    return J


def measure_pair(pair):
    """Stacked correlations ``[a1, a12, a21, a2]`` of a signal pair."""
    return np.concatenate(
        [
            autocorrelation(pair.x1),
            correlate(pair.x1, pair.x2),
            correlate(pair.x2, pair.x1),
            autocorrelation(pair.x2),
        ]
    )


def embed_autocorrelation_parts(a1, a12, a21, a2, L1, L2):
    """Reassemble the autocorrelation of ``[x1, x2]`` from its four parts."""
    N = L1 + L2
    a = np.zeros(2 * N - 1)
    a[L2 : L2 + 2 * L1 - 1] += a1
    a[L1 : L1 + 2 * L2 - 1] += a2
    a[: N - 1] += a12
    a[N:] += a21
    return a


def split_stacked_autocorrelation(a, a1, a2, L1, L2):
    """Recover ``(a12, a21)`` from the autocorrelation of the stacked signal.

    The two cross-correlations occupy disjoint time slots on either side of
    lag zero once the zero-padded autocorrelations are subtracted.
    """
    N = L1 + L2
    a = as_signal(a, "a")
    a1 = as_signal(a1, "a1")
    a2 = as_signal(a2, "a2")
    if a.size != 2 * N - 1 or a1.size != 2 * L1 - 1 or a2.size != 2 * L2 - 1:
        raise ValueError("inconsistent autocorrelation lengths")
    rest = a - embed_autocorrelation_parts(a1, np.zeros(N - 1), np.zeros(N - 1), a2, L1, L2)
    return rest[: N - 1].copy(), rest[N:].copy()


def add_noise(b, sigma, seed=0):
    """Add i.i.d. ``N(0, sigma^2)`` noise; returns ``(noisy b, |n|_2)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    b = np.asarray(b, dtype=float)
    if sigma == 0:
        return b.copy(), 0.0
    n = np.random.default_rng(seed).normal(0.0, sigma, size=b.shape)
    return b + n, float(np.linalg.norm(n))


def measurement_to_json(L1, L2, b, sigma, seed, noise_norm=0.0):
    return {
        "L1": int(L1),
        "L2": int(L2),
        "b": [float(v) for v in b],
        "sigma": float(sigma),
        "seed": int(seed),
        "noise_norm": float(noise_norm),
    }


def measurement_from_json(obj):
    """Parse a measurement file; returns ``(L1, L2, b)``."""
    try:
        L1, L2 = int(obj["L1"]), int(obj["L2"])
        b = np.asarray(obj["b"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed measurement file: {exc}") from exc
    if L1 < 1 or L2 < 1 or b.shape != (4 * (L1 + L2) - 4,):
        raise ValueError("measurement length does not match 4(L1+L2)-4")
    if not np.all(np.isfinite(b)):
        raise ValueError("measurement has non-finite values")
    return L1, L2, b
