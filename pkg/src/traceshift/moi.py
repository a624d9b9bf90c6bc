"""Finite-dimensional multilinear operator integrals.

The abstract symbol/measure factorization is instantiated as the joint
eigenprojection sum

    T(V_1, ..., V_k) = sum over tuples  phi(lam_0,j0, ..., lam_k,jk)
                        P_0,j0 V_1 P_1,j1 ... V_k P_k,jk,

which is exact in finite dimensions. The contraction runs in the joint
eigenbasis through a compiled kernel (numpy fallback selected at import,
see ``_backend``); both backends accumulate in a fixed coordinate order,
so results are reproducible bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .config import DEFAULTS, Numerics
from .errors import DimensionMismatch, TermLimitExceeded
from .linops import SpectralDecomposition, as_matrix, schatten_norm, spectral_decompose
from .symbols import LaurentPolynomial, derivative, monomial_divided_difference

__all__ = [
    "MoiSymbol",
    "CallableSymbol",
    "LaurentDividedDifference",
    "PinnedLastSymbol",
    "MoiResult",
    "moi_apply",
    "trace_reduce",
    "perturbation_first",
    "perturbation_split",
]


class MoiSymbol:
    """Scalar symbol of a multilinear operator integral.

    ``arity`` is the number of spectral slots (k+1 for a k-linear
    transformation). Subclasses provide ``evaluate`` on a single tuple;
    ``evaluate_grid`` defaults to looping over the spectral grid and may
    be overridden with a vectorized rule.
    """

    arity: int
    symmetric: bool = False

    def evaluate(self, points) -> complex:
        raise NotImplementedError

    def evaluate_grid(self, spectra) -> np.ndarray:
        shape = tuple(len(s) for s in spectra)
        out = np.empty(shape, dtype=np.complex128)
        cache: dict = {}
        for idx in itertools.product(*map(range, shape)):
            pts = tuple(complex(spectra[i][j]) for i, j in enumerate(idx))
            if self.symmetric:
                key = tuple(sorted(pts, key=lambda z: (z.real, z.imag)))
                if key not in cache:
                    cache[key] = self.evaluate(pts)
                out[idx] = cache[key]
            else:
                out[idx] = self.evaluate(pts)
        return out

    def sup_estimate(self, grid: np.ndarray) -> float:
        """Diagnostic proxy for the derivative sup-norm behind the symbol."""
        return float(np.max(np.abs(grid))) if grid.size else 0.0


class CallableSymbol(MoiSymbol):
    """Symbol given by an arbitrary evaluator on spectrum tuples."""

    def __init__(self, fn, arity: int, symmetric: bool = False):
        self.fn = fn
        self.arity = arity
        self.symmetric = symmetric

    def evaluate(self, points) -> complex:
        return complex(self.fn(*points))


class LaurentDividedDifference(MoiSymbol):
    """Divided difference of a Laurent polynomial, closed-form evaluation.

    The closed forms (complete homogeneous symmetric polynomials in the
    points, resp. their reciprocals) are exact at coincident points, so
    clustered spectra are safe.
    """

    def __init__(self, f: LaurentPolynomial, order: int):
        if order < 0:
            raise ValueError("order must be >= 0")
        self.f = f
        self.order = order
        self.arity = order + 1
        self.symmetric = True

    def evaluate(self, points) -> complex:
        return complex(
            sum(c * monomial_divided_difference(m, points) for m, c in self.f.coeffs.items())
        )

    def evaluate_grid(self, spectra) -> np.ndarray:
        return _laurent_dd_grid(self.f, [np.asarray(s, dtype=np.complex128) for s in spectra])

    def sup_estimate(self, grid=None) -> float:
        # max |f^(order)| sampled on the circle
        df = derivative(self.f, self.order)
        theta = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
        z = np.exp(1j * theta)
        vals = np.zeros_like(z)
        for m, c in df.coeffs.items():
            vals += c * z**m
        return float(np.max(np.abs(vals)))


class PinnedLastSymbol(MoiSymbol):
    """Base symbol with its last argument pinned to the first.

    Realizes the trace-reduction symbol phi(z_0, ..., z_{n-1}) =
    base(z_0, ..., z_{n-1}, z_0).
    """

    def __init__(self, base: MoiSymbol):
        if base.arity < 2:
            raise ValueError("base symbol must have arity >= 2")
        self.base = base
        self.arity = base.arity - 1
        self.symmetric = False

    def evaluate(self, points) -> complex:
        return self.base.evaluate(tuple(points) + (points[0],))


def _homogeneous_rows(grids, max_degree: int):
    """DP rows h_0..h_max over a broadcast product grid.

    ``grids[i]`` is broadcastable along axis i; returns full tensors.
    """
    shape = tuple(g.shape[i] for i, g in enumerate(grids))
    rows = [np.ones(shape, dtype=np.complex128)]
    rows += [np.zeros(shape, dtype=np.complex128) for _ in range(max_degree)]
    for g in grids:
        for d in range(1, max_degree + 1):
            rows[d] = rows[d] + g * rows[d - 1]
    return rows


def _axis_grids(spectra):
    k = len(spectra) - 1
    out = []
    for i, s in enumerate(spectra):
        shape = [1] * (k + 1)
        shape[i] = len(s)
        out.append(np.asarray(s, dtype=np.complex128).reshape(shape))
    return out


def _laurent_dd_grid(f: LaurentPolynomial, spectra) -> np.ndarray:
    """Vectorized divided-difference tensor of a Laurent polynomial."""
    k = len(spectra) - 1
    shape = tuple(len(s) for s in spectra)
    phi = np.zeros(shape, dtype=np.complex128)
    pos = [m for m in f.coeffs if m >= 0]
    neg = [-m for m in f.coeffs if m < 0]
    if pos:
        top = max(pos) - k
        if top >= 0:
            rows = _homogeneous_rows(_axis_grids(spectra), top)
            for m in pos:
                if m - k >= 0:
                    phi += f.coeffs[m] * rows[m - k]
    if neg:
        inv = [1.0 / np.asarray(s, dtype=np.complex128) for s in spectra]
        rows = _homogeneous_rows(_axis_grids(inv), max(neg) - 1)
        prod_inv = np.ones(shape, dtype=np.complex128)
        for g in _axis_grids(inv):
            prod_inv = prod_inv * g
        sign = (-1) ** k
        for q in neg:
            phi += f.coeffs[-q] * sign * rows[q - 1] * prod_inv
    return phi


@dataclass(frozen=True)
class MoiResult:
    """Eigen-sum value with its term count and norm diagnostic.

    ``bound_report`` is (sup-norm proxy of the symbol) x (product of
    Schatten-k norms of the arguments); the sharp constant in front is
    unknown, so it is reported, never asserted against a fixed value.
    """

    matrix: np.ndarray
    term_count: int
    bound_report: float


def moi_apply(
    symbol: MoiSymbol,
    decomps,
    vs,
    numerics: Numerics = DEFAULTS,
) -> MoiResult:
    """Joint eigenprojection sum pairing ``symbol`` with k perturbation slots.

    Parameters
    ----------
    symbol : MoiSymbol of arity k+1
    decomps : k+1 spectral decompositions
    vs : k square matrices

    The sum is linear in every slot and exact up to roundoff. Instances
    with more than ``numerics.moi_term_limit`` terms are refused.
    """
    decomps = list(decomps)
    vs = [as_matrix(v) for v in vs]
    k = len(vs)
    if k < 1:
        raise DimensionMismatch("need at least one perturbation slot")
    if len(decomps) != k + 1:
        raise DimensionMismatch(f"expected {k + 1} decompositions, got {len(decomps)}")
    if symbol.arity != k + 1:
        raise DimensionMismatch(f"symbol arity {symbol.arity} != {k + 1}")
    dim = decomps[0].dim
    for d in decomps:
        if d.dim != dim:
            raise DimensionMismatch("decompositions have mixed dimensions")
    for v in vs:
        if v.shape[0] != dim:
            raise DimensionMismatch("slot matrix dimension mismatch")

    counts = [len(d.eigenvalues) for d in decomps]
    term_count = math.prod(counts)
    if term_count > numerics.moi_term_limit:
        raise TermLimitExceeded(f"{term_count} terms exceed limit {numerics.moi_term_limit}")

    phi = symbol.evaluate_grid([d.eigenvalues for d in decomps])
    w = np.empty((k, dim, dim), dtype=np.complex128)
    for i in range(k):
        w[i] = decomps[i].basis.conj().T @ vs[i] @ decomps[i + 1].basis
    eig_out = _backend.moi_contract(
        np.ascontiguousarray(phi.ravel()),
        np.asarray(counts, dtype=np.intp),
        np.ascontiguousarray(
            np.stack([d.cluster_of_column for d in decomps]), dtype=np.intp
        ),
        w,
    )
    matrix = decomps[0].basis @ eig_out @ decomps[-1].basis.conj().T

    bound = symbol.sup_estimate(phi)
    for v in vs:
        bound *= schatten_norm(v, k)
    return MoiResult(matrix=matrix, term_count=term_count, bound_report=float(bound))


def _as_decomposition(op, numerics: Numerics) -> SpectralDecomposition:
    """Accept a decomposition, a typed operator, or a raw normal matrix."""
    if isinstance(op, SpectralDecomposition):
        return op
    m = getattr(op, "matrix", op)
    return spectral_decompose(m, numerics.cluster_tol, numerics.normal_tol)


def _alternating_decomps(d0, d1, total: int):
    """Pattern (D0, D1, D0, ..., D0) of the given total length."""
    return [d0, d1] + [d0] * (total - 2) if total >= 2 else [d0]


def trace_reduce(symbol: MoiSymbol, u0, u1, vs, numerics: Numerics = DEFAULTS):
    """Both sides of the cyclic trace reduction.

    lhs = Tr T_symbol^{U0,U1,U0,...}(V_1, ..., V_n);
    rhs pins the last spectral variable to the first and multiplies the
    final slot back in: Tr(T_pinned(V_1, ..., V_{n-1}) V_n). For n = 1
    the reduction collapses to Tr(f'(U_0) V_1). The operator arguments
    may be spectral decompositions, typed operators, or normal matrices.
    """
    d0 = _as_decomposition(u0, numerics)
    d1 = _as_decomposition(u1, numerics)
    vs = [as_matrix(v) for v in vs]
    n = len(vs)
    # The reduction pins the last spectral variable to the first, so the
    # outer decompositions must coincide; the perturbed one sits in slot 1
    # and only appears for n >= 2.
    lhs_decomps = [d0, d0] if n == 1 else _alternating_decomps(d0, d1, n + 1)
    lhs = complex(np.trace(moi_apply(symbol, lhs_decomps, vs, numerics).matrix))
    if n == 1:
        pinned = PinnedLastSymbol(symbol)
        vals = [pinned.evaluate((lam,)) for lam in d0.eigenvalues]
        rhs = complex(np.trace(d0.apply_function(vals) @ vs[0]))
    else:
        pinned = PinnedLastSymbol(symbol)
        reduced = moi_apply(pinned, _alternating_decomps(d0, d1, n), vs[:-1], numerics)
        rhs = complex(np.trace(reduced.matrix @ vs[-1]))
    return lhs, rhs


def perturbation_first(f: LaurentPolynomial, u0, u1, numerics: Numerics = DEFAULTS) -> float:
    """Residual of f(U_1) - f(U_0) = T_{f^[1]}(U_1 - U_0), both slot orders.

    Returns the max of the two identity residuals in max-norm.
    """
    d0 = _as_decomposition(u0, numerics)
    d1 = _as_decomposition(u1, numerics)
    delta = d1.apply_function(d1.eigenvalues) - d0.apply_function(d0.eigenvalues)
    diff = d1.apply_function([f(lam) for lam in d1.eigenvalues]) - d0.apply_function(
        [f(lam) for lam in d0.eigenvalues]
    )
    sym = LaurentDividedDifference(f, 1)
    r1 = moi_apply(sym, [d1, d0], [delta], numerics).matrix
    r2 = moi_apply(sym, [d0, d1], [delta], numerics).matrix
    return float(max(np.max(np.abs(diff - r1)), np.max(np.abs(diff - r2))))


def perturbation_split(
    f: LaurentPolynomial,
    n: int,
    u0,
    u1,
    u2,
    vs,
    numerics: Numerics = DEFAULTS,
) -> float:
    """Residual of the one-slot splitting identity.

    T_{f^[n-1]}^{U0,U1,U0,..}(V) - T_{f^[n-1]}^{U0,U2,U0,..}(V) equals
    T_{f^[n]}^{U0,U1,U2,U0,..}(V_1, U_1 - U_2, V_2, ...), reported in
    max-norm.
    """
    d0 = _as_decomposition(u0, numerics)
    d1 = _as_decomposition(u1, numerics)
    d2 = _as_decomposition(u2, numerics)
    vs = [as_matrix(v) for v in vs]
    if n < 2:
        raise ValueError("splitting identity needs n >= 2")
    if len(vs) != n - 1:
        raise DimensionMismatch(f"expected {n - 1} slot matrices, got {len(vs)}")
    mid_diff = d1.apply_function(d1.eigenvalues) - d2.apply_function(d2.eigenvalues)
    sym_lo = LaurentDividedDifference(f, n - 1)
    lhs = (
        moi_apply(sym_lo, _alternating_decomps(d0, d1, n), vs, numerics).matrix
        - moi_apply(sym_lo, _alternating_decomps(d0, d2, n), vs, numerics).matrix
    )
    sym_hi = LaurentDividedDifference(f, n)
    args = [vs[0], mid_diff] + vs[1:]
    decomps = [d0, d1, d2] + [d0] * (n - 2)
    rhs = moi_apply(sym_hi, decomps, args, numerics).matrix
    return float(np.max(np.abs(lhs - rhs)))
