"""Real time-discrete signals: convolution, correlation and z-domain zeros."""

from dataclasses import dataclass, field

import numpy as np

from blinddeconv import tolerances as tol
from blinddeconv.errors import AdmissibilityError, GenerationError
from blinddeconv.numerics import poly_roots


def as_signal(a, name="signal"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def is_nonzero(value, signal):
    """Admissibility test for one coefficient of ``signal``."""
    scale = max(1.0, float(np.abs(signal).max()))
    return abs(value) > tol.ADMISSIBLE_RTOL * scale


def convolve(a, b):
    """Linear convolution, length ``len(a) + len(b) - 1``."""
    return np.convolve(as_signal(a), as_signal(b))


def reverse(a):
    """Time reversal: ``result[k] = a[L-1-k]``."""
    return as_signal(a)[::-1].copy()


def correlate(a, b):
    """Correlation of ``a`` with ``b``, i.e. ``a * reverse(b)``."""
    return convolve(a, reverse(b))


def autocorrelation(a):
    return correlate(a, a)


def z_eval(a, z):
    """Evaluate the z-transform ``sum_k a_k z^{-k}`` at a nonzero point."""
    a = as_signal(a)
    z = complex(z)
    if z == 0:
        raise ValueError("z-transform is not defined at z = 0")
    w = 1.0 / z
    acc = 0j
    for coeff in a[::-1]:
        acc = acc * w + coeff
    return acc


def zeros(a):
    """Zeros of the z-transform of ``a`` (``len(a) - 1`` of them)."""
    a = as_signal(a)
    if not is_nonzero(a[0], a):
        raise AdmissibilityError("first coefficient must be nonzero")
    if a.size == 1:
        return np.zeros(0, dtype=complex)
    return poly_roots(a)


@dataclass(frozen=True)
class SignalPair:
    """Ground truth ``(x1, x2)``.

    ``x1`` needs a nonzero first entry, ``x2`` nonzero first and last entries.
    """

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = as_signal(self.x1, "x1")
        x2 = as_signal(self.x2, "x2")
        if not is_nonzero(x1[0], x1):
            raise AdmissibilityError("x1 must have a nonzero first entry")
        if not (is_nonzero(x2[0], x2) and is_nonzero(x2[-1], x2)):
            raise AdmissibilityError("x2 must have nonzero first and last entries")
        x1.setflags(write=False)
        x2.setflags(write=False)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    @property
    def L1(self):
        return self.x1.size

    @property
    def L2(self):
        return self.x2.size

    @property
    def N(self):
        return self.L1 + self.L2

    @property
    def x(self):
        return stack(self)

    @property
    def norm(self):
        return float(np.linalg.norm(self.x))

    def normalized(self):
        """The pair scaled so that the stacked vector has unit norm."""
        s = self.norm
        return SignalPair(self.x1 / s, self.x2 / s)

    @classmethod
    def from_stacked(cls, x, L1):
        x = as_signal(x)
        return cls(x[:L1], x[L1:])

    def to_json(self):
        return {"x1": [float(v) for v in self.x1], "x2": [float(v) for v in self.x2]}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "x1" not in obj or "x2" not in obj:
            raise ValueError('signal file needs keys "x1" and "x2"')
        return cls(np.asarray(obj["x1"], dtype=float), np.asarray(obj["x2"], dtype=float))


def stack(pair):
    return np.concatenate([pair.x1, pair.x2])


@dataclass(frozen=True)
class ZeroSeparationReport:
    delta: float
    delta_minus: float
    roots1: np.ndarray = field(repr=False)
    roots2: np.ndarray = field(repr=False)


def zero_separation(pair):
    """Minimal distances between the zeros of ``x1`` and ``x2``.

    ``delta`` compares the zeros directly, ``delta_minus`` compares the
    reflected zeros ``1/conj(alpha)`` of ``x1`` against those of ``x2``.
    """
    if pair.L1 < 2 or pair.L2 < 2:
        raise ValueError("zero separation needs L1, L2 >= 2 (no zeros otherwise)")
    alpha = zeros(pair.x1)
    beta = zeros(pair.x2)
    if np.any(alpha == 0):
        raise AdmissibilityError("x1 has a zero at the origin; delta_minus undefined")
    delta = float(np.abs(alpha[:, None] - beta[None, :]).min())
    delta_minus = float(np.abs(1.0 / np.conj(alpha)[:, None] - beta[None, :]).min())
    return ZeroSeparationReport(delta, delta_minus, alpha, beta)


def random_pair(L1, L2, min_delta=0.0, seed=0):
    """Standard-normal pair, resampled until admissible and well separated.

    When both lengths are at least 2, both ``delta`` and ``delta_minus``
    must reach ``min_delta``.
    """
    if L1 < 1 or L2 < 1:
        raise ValueError("L1 and L2 must be >= 1")
    if min_delta < 0:
        raise ValueError("min_delta must be >= 0")
    rng = np.random.default_rng(seed)
    for _ in range(tol.GENERATION_MAX_DRAWS):
        x1 = rng.standard_normal(L1)
        x2 = rng.standard_normal(L2)
        try:
            pair = SignalPair(x1, x2)
            if L1 >= 2 and L2 >= 2:
                rep = zero_separation(pair)
                if rep.delta < min_delta or rep.delta_minus < min_delta:
                    continue
        except AdmissibilityError:
            continue
        return pair
    raise GenerationError(
        f"no admissible pair with min_delta={min_delta} after "
        f"{tol.GENERATION_MAX_DRAWS} draws"
    )
