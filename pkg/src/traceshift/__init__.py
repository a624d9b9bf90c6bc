"""Finite-dimensional laboratory for higher-order trace formulas.

Dense-matrix realizations of multilinear operator integrals, operator
Taylor remainders along multiplicative and linear paths, truncated block
unitary dilations, Cayley transforms, and spectral-shift extraction, with
a verification harness for the resulting trace identities.
"""

__version__ = "0.1.0"

from ._backend import BACKEND as kernel_backend
from .config import DEFAULTS, Numerics
from .linops import (
    ContractionOperator,
    SelfAdjointOperator,
    SpectralDecomposition,
    UnitaryOperator,
    defect_pair,
    matrix_exp_i,
    schatten_norm,
    spectral_decompose,
    validate,
)
from .symbols import LaurentPolynomial, DiskPoint
from .moi import LaurentDividedDifference, MoiResult, moi_apply, trace_reduce
from .paths import (
    MultiplicativePath,
    TaylorRemainder,
    derivative_mult,
    derivative_power,
    remainder_lin,
    remainder_mult,
    remainder_quadrature,
)
from .dilation import SchafferDilation, build_dilation, compress_middle, dilated_remainder
# The Cayley-transform functions live in traceshift.cayley; re-exporting the
# `cayley` callable here would shadow that module, so only types surface.
from .cayley import DissipativeOperator, GammaDensity
from .ssf import SpectralShiftData, VerificationReport, predict_trace, verify

__all__ = [
    "__version__",
    "kernel_backend",
    "DEFAULTS",
    "Numerics",
    "ContractionOperator",
    "SelfAdjointOperator",
    "SpectralDecomposition",
    "UnitaryOperator",
    "defect_pair",
    "matrix_exp_i",
    "schatten_norm",
    "spectral_decompose",
    "validate",
    "LaurentPolynomial",
    "DiskPoint",
    "LaurentDividedDifference",
    "MoiResult",
    "moi_apply",
    "trace_reduce",
    "MultiplicativePath",
    "TaylorRemainder",
    "derivative_mult",
    "derivative_power",
    "remainder_lin",
    "remainder_mult",
    "remainder_quadrature",
    "SchafferDilation",
    "build_dilation",
    "compress_middle",
    "dilated_remainder",
    "DissipativeOperator",
    "GammaDensity",
    "SpectralShiftData",
    "VerificationReport",
    "predict_trace",
    "verify",
]
