"""Blind deconvolution from cross-correlation and autocorrelations.

The lifted measurement map, its dual certificates and the noise-stability
constants of the real case, plus a projected-gradient solver for the
least-squares program over the PSD cone.
"""

from blinddeconv.errors import (
    AdmissibilityError,
    ConvergenceError,
    DegenerateBoundError,
    ExtractionError,
    GenerationError,
    UndefinedBoundError,
)
from blinddeconv.measurement import (
    SensingEnsemble,
    adjoint,
    build_ensemble,
    forward,
    measure_pair,
)
from blinddeconv.signals import SignalPair, random_pair, zero_separation
from blinddeconv.solver import SolverOptions, extract_signal, solve_denoised
from blinddeconv.stability import bounds_report, stability_constant, universal_bound

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "ConvergenceError",
    "DegenerateBoundError",
    "ExtractionError",
    "GenerationError",
    "UndefinedBoundError",
    "SensingEnsemble",
    "SignalPair",
    "SolverOptions",
    "adjoint",
    "bounds_report",
    "build_ensemble",
    "extract_signal",
    "forward",
    "measure_pair",
    "random_pair",
    "solve_denoised",
    "stability_constant",
    "universal_bound",
    "zero_separation",
]
