"""Noise-stability constants of the lifted program.

Every quantity is computed on the pair scaled to ``|x| = 1``; the scale is
recorded in :class:`BoundsReport` so callers can tell.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from blinddeconv import tolerances as tol
from blinddeconv.errors import DegenerateBoundError, UndefinedBoundError
from blinddeconv.measurement import build_ensemble, tangent_jacobian
from blinddeconv.numerics import sym_eig
from blinddeconv.signals import reverse, zero_separation
from blinddeconv.sylvester import (
    banded_toeplitz,
    reversal_matrix,
    sylvester_lifted,
)


def _lambda2(A):
    return float(sym_eig(A).eigenvalues[1])


def _certificate_matrices(pair):
    bundle = sylvester_lifted(pair)
    return bundle.S.T @ bundle.S, bundle.S_minus.T @ bundle.S_minus


def tangent_matrix(pair, ensemble=None):
    """``F`` with ``F @ y == forward(x y^T + y x^T)``."""
    if ensemble is None:
        ensemble = build_ensemble(pair.L1, pair.L2)
    return tangent_jacobian(ensemble, pair.x)


def reflection_operator(L1, L2):
    """``P`` mapping ``y_minus = [y1, -reverse(y2)]`` back to ``y``."""
    P = np.zeros((L1 + L2, L1 + L2))
    P[:L1, :L1] = np.eye(L1)
    P[L1:, L1:] = -reversal_matrix(L2)
    return P


def intertwining_matrix(n):
    """``J = I + R``; satisfies ``J @ J == 2 J``."""
    return np.eye(n) + reversal_matrix(n)


@dataclass(frozen=True)
class MixingSystem:
    M_matrix: np.ndarray
    D: np.ndarray
    W_minus: np.ndarray
    gram: np.ndarray
    pair: object = field(repr=False)


def mixing_system(pair, ensemble=None):
    """Tangent-space map in the reflected coordinates ``y_minus``.

    ``M_matrix @ y_minus == forward(x y^T + y x^T)`` and
    ``M^T M == 2 (D + W_minus)``.
    """
    pair = pair.normalized()
    L1, L2 = pair.L1, pair.L2
    M = tangent_matrix(pair, ensemble) @ reflection_operator(L1, L2)
    T1 = banded_toeplitz(reverse(pair.x1), L1)
    T2 = banded_toeplitz(pair.x2, L2)
    D = np.zeros((pair.N, pair.N))
    D[:L1, :L1] = T1.T @ intertwining_matrix(2 * L1 - 1) @ T1
    D[L1:, L1:] = T2.T @ intertwining_matrix(2 * L2 - 1) @ T2
    _, W_minus = _certificate_matrices(pair)
    return MixingSystem(M, D, W_minus, M.T @ M, pair)


def lambda1_DplusWminus(system):
    return float(sym_eig(system.D + system.W_minus).eigenvalues[0])


def gamma_bound(pair):
    """Lower bound ``sqrt(lambda2(W_minus)) / (4 N sqrt 2)`` on the local 2-RIP constant."""
    _, W_minus = _certificate_matrices(pair.normalized())
    lam = _lambda2(W_minus)
    if lam <= tol.DEGENERATE_LAMBDA2:
        raise DegenerateBoundError(
            f"lambda2(W_minus) = {lam:.3g}: x1 and reverse(x2) share a factor"
        )
    return float(np.sqrt(lam) / (4.0 * pair.N * np.sqrt(2.0)))


def _tangent_ratio(F, x, Y):
    """``|A(x y^T + y x^T)| / |x y^T + y x^T|_F`` for every row ``y`` of ``Y``."""
    num = np.linalg.norm(Y @ F.T, axis=1)
    den = np.sqrt(2.0 * np.sum(Y * Y, axis=1) + 2.0 * (Y @ x) ** 2)
    return num / den


def _analytic_candidates(pair, F, system):
    x = pair.x
    N = pair.N
    cands = [x]
    # a direction orthogonal to x
    e = np.zeros(N)
    e[int(np.argmin(np.abs(x)))] = 1.0
    ortho = e - (e @ x) * x
    cands.append(ortho / np.linalg.norm(ortho))
    # minimizer of the reflected eigenproblem, mapped back to y
    v = sym_eig(system.D + system.W_minus).eigenvectors[:, 0]
    cands.append(reflection_operator(pair.L1, pair.L2) @ v)
    # exact minimizer of |F y|^2 / (2|y|^2 + 2 (x.y)^2)
    w, V = sym_eig(2.0 * np.eye(N) + 2.0 * np.outer(x, x))
    B_inv_half = (V / np.sqrt(w)) @ V.T
    G = B_inv_half @ (F.T @ F) @ B_inv_half
    G = 0.5 * (G + G.T)
    cands.append(B_inv_half @ sym_eig(G).eigenvectors[:, 0])
    return np.array(cands)


def gamma_bruteforce(pair, samples=10000, seed=0):
    """Sampled upper estimate of the local 2-RIP constant.

    Minimum of the tangent-space ratio over ``samples`` seeded random
    directions plus a few analytic candidates.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pair = pair.normalized()
    ensemble = build_ensemble(pair.L1, pair.L2)
    F = tangent_matrix(pair, ensemble)
    system = mixing_system(pair, ensemble)
    Y = np.random.default_rng(seed).standard_normal((samples, pair.N))
    Y = np.vstack([Y, _analytic_candidates(pair, F, system)])
    return float(_tangent_ratio(F, pair.x, Y).min())


def _lambda2_pair(pair):
    W, W_minus = _certificate_matrices(pair.normalized())
    lam_w, lam_wm = _lambda2(W), _lambda2(W_minus)
    if lam_w <= tol.DEGENERATE_LAMBDA2:
        raise DegenerateBoundError(f"lambda2(W) = {lam_w:.3g}: x1 and x2 share a factor")
    if lam_wm <= tol.DEGENERATE_LAMBDA2:
        raise DegenerateBoundError(
            f"lambda2(W_minus) = {lam_wm:.3g}: x1 and reverse(x2) share a factor"
        )
    return lam_w, lam_wm


def stability_constant_from_lambdas(N, lam_w, lam_wm):
    return float(
        2.0
        * N
        * (
            23.0 * N**2 / (lam_w * np.sqrt(lam_wm))
            + 1.0 / lam_w
            + 4.0 * np.sqrt(2.0) / np.sqrt(lam_wm)
        )
    )


def stability_constant(pair):
    """Constant ``C`` with ``|X_hat - x x^T|_F <= C |n|`` from the certificate spectra."""
    lam_w, lam_wm = _lambda2_pair(pair)
    return stability_constant_from_lambdas(pair.N, lam_w, lam_wm)


def _universal_preconditions(pair):
    if pair.L1 < 2 or pair.L2 < 2:
        raise UndefinedBoundError("needs L1, L2 >= 2 (no zeros otherwise)")
    if pair.N < 4:
        raise UndefinedBoundError("needs N >= 4")
    rep = zero_separation(pair)
    if rep.delta <= 0.0 or rep.delta_minus <= 0.0:
        raise UndefinedBoundError("zero separation is zero")
    return rep


def universal_bound(pair):
    """Zero-separation bound on ``C``::

        48 N^3 (delta_minus delta^2)^{-L1 L2} |x1_0^3 x2_{L2-1}|^{-L1} |x2_0|^{-3 L2}

    evaluated on the unit-norm pair.
    """
    rep = _universal_preconditions(pair)
    p = pair.normalized()
    L1, L2, N = p.L1, p.L2, p.N
    x10, x20, x2e = abs(p.x1[0]), abs(p.x2[0]), abs(p.x2[-1])
    log_c = (
        np.log(48.0 * N**3)
        - L1 * L2 * (np.log(rep.delta_minus) + 2.0 * np.log(rep.delta))
        - L1 * (3.0 * np.log(x10) + np.log(x2e))
        - 3.0 * L2 * np.log(x20)
    )
    return float(np.exp(log_c)) if log_c < 709.0 else float("inf")


def sylvester_sigma_bounds(pair):
    """Closed-form ``(sigma, sigma_minus)`` feeding :func:`universal_bound`.

    These are the zero-separation expressions for the smallest singular
    values of ``S0`` and its reflected analogue on the unit-norm pair. They
    are not guaranteed lower bounds when a separation exceeds one.
    """
    rep = _universal_preconditions(pair)
    p = pair.normalized()
    L1, L2 = p.L1, p.L2
    x10, x20, x2e = abs(p.x1[0]), abs(p.x2[0]), abs(p.x2[-1])
    sigma = x10**L1 * x20**L2 * rep.delta ** (L1 * L2)
    sigma_minus = x10**L1 * x2e**L2 * rep.delta_minus ** (L1 * L2)
    return float(sigma), float(sigma_minus)


@dataclass(frozen=True)
class BoundsReport:
    N: int
    L1: int
    L2: int
    norm: float
    delta: float | None
    delta_minus: float | None
    lambda2_W: float
    lambda2_Wminus: float
    gamma_bound: float | None
    gamma_bruteforce: float
    C_thm2: float | None
    C_universal: float | None
    reasons: dict = field(default_factory=dict)

    def to_json(self):
        out = asdict(self)
        reasons = dict(out.pop("reasons"))
        for key, value in out.items():
            if isinstance(value, float) and not np.isfinite(value):
                out[key] = None
                reasons.setdefault(key, "overflow: value exceeds floating-point range")
        out["normalization"] = "x / |x|_2"
        for key, value in reasons.items():
            out[f"{key}_reason"] = value
        return out


def bounds_report(pair, samples=10000, seed=0):
    reasons = {}
    try:
        rep = zero_separation(pair)
        delta, delta_minus = rep.delta, rep.delta_minus
    except ValueError as exc:
        delta = delta_minus = None
        reasons["delta"] = str(exc)
    W, W_minus = _certificate_matrices(pair.normalized())
    lam_w, lam_wm = _lambda2(W), _lambda2(W_minus)
    try:
        g = gamma_bound(pair)
    except DegenerateBoundError as exc:
        g = None
        reasons["gamma_bound"] = str(exc)
    try:
        c2 = stability_constant(pair)
    except DegenerateBoundError as exc:
        c2 = None
        reasons["C_thm2"] = str(exc)
    try:
        cu = universal_bound(pair)
    except (UndefinedBoundError, ValueError) as exc:
        cu = None
        reasons["C_universal"] = str(exc)
    return BoundsReport(
        N=pair.N,
        L1=pair.L1,
        L2=pair.L2,
        norm=pair.norm,
        delta=delta,
        delta_minus=delta_minus,
        lambda2_W=lam_w,
        lambda2_Wminus=lam_wm,
        gamma_bound=g,
        gamma_bruteforce=gamma_bruteforce(pair, samples, seed),
        C_thm2=c2,
        C_universal=cu,
        reasons=reasons,
    )
