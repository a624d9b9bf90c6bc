"""Multiplicative and linear operator paths with their Taylor remainders.

Derivatives of powers along a multiplicative path X_s = exp(isG) X_0 are
assembled by a block-Toeplitz recursion: with Z_{ab} = (iG)^{b-a}/(b-a)! X_s
(upper triangular), the top row of Z^k carries d^l/ds^l X_s^k / l! for all
orders l at once. This evaluates the same composition sum as the explicit
enumeration, just with shared partial products; the enumeration is kept in
the test suite as an independent oracle.

Functions of contractions are taken term-by-term over Fourier
coefficients, with negative degrees routed through adjoint powers; the
negative-degree side runs its own recursion so that adjoint symmetry of
the remainders is a checkable property rather than a definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .config import DEFAULTS, Numerics
from .errors import DimensionMismatch, PartitionOverflow
from .linops import (
    ContractionOperator,
    SelfAdjointOperator,
    UnitaryOperator,
    as_matrix,
    hermitian_function,
    spectral_decompose,
)
from .moi import LaurentDividedDifference, moi_apply
from .symbols import LaurentPolynomial

__all__ = [
    "MultiplicativePath",
    "TaylorRemainder",
    "derivative_mult",
    "derivative_power",
    "remainder_mult",
    "remainder_monomials",
    "remainder_lin",
    "remainder_quadrature",
    "compositions",
]


@dataclass(frozen=True)
class MultiplicativePath:
    """Path X_s = exp(isG) X_0 with a self-adjoint generator G.

    ``base`` is unitary or contractive; the path stays in the same class
    for every s because exp(isG) is unitary.
    """

    base: UnitaryOperator | ContractionOperator
    generator: SelfAdjointOperator

    def __post_init__(self):
        if self.base.matrix.shape != self.generator.matrix.shape:
            raise DimensionMismatch("base and generator dimensions differ")

    @property
    def kind(self) -> str:
        return "unitary" if isinstance(self.base, UnitaryOperator) else "contraction"

    @property
    def dim(self) -> int:
        return self.base.matrix.shape[0]

    def point(self, s: float) -> np.ndarray:
        """X_s = exp(isG) X_0."""
        if s == 0.0:
            return self.base.matrix.copy()
        g = self.generator.matrix
        return hermitian_function(g, lambda lam: np.exp(1j * s * lam)) @ self.base.matrix


@dataclass(frozen=True)
class TaylorRemainder:
    """Remainder of an operator Taylor expansion.

    ``closed_form_residual`` is filled for the linear kind: max-norm gap
    between the direct remainder and its single-integral closed form.
    """

    matrix: np.ndarray
    kind: str
    order: int
    closed_form_residual: float | None = None

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def compositions(total: int, parts: int):
    """Ordered compositions of ``total`` into ``parts`` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _power_derivative_rows(x: np.ndarray, g: np.ndarray, orders: int, kmax: int, adjoint: bool):
    """Top block-row recursion for derivatives of powers.

    Returns rows[k][l] = d^l/ds^l X_s^k / l! at the supplied point for
    k = 0..kmax and l = 0..orders (adjoint=True computes the same for
    (X_s^*)^k).
    """
    d = x.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    ig = 1j * g
    if adjoint:
        ig = -ig
        x = x.conj().T
    # C[m] = (iG)^m / m! combined with X on the proper side
    gp = [eye]
    for m in range(1, orders + 1):
        gp.append(gp[-1] @ ig / m)
    if adjoint:
        cs = [x @ p for p in gp]
    else:
        cs = [p @ x for p in gp]
    rows = [[eye] + [np.zeros((d, d), dtype=np.complex128)] * orders]
    for _ in range(kmax):
        prev = rows[-1]
        rows.append([sum(prev[j] @ cs[l - j] for j in range(l + 1)) for l in range(orders + 1)])
    return rows


def derivative_power(
    path: MultiplicativePath,
    k: int,
    n: int,
    s: float = 0.0,
    numerics: Numerics = DEFAULTS,
) -> np.ndarray:
    """n-th derivative of X_s^k along the path; k < 0 via adjoint powers.

    Evaluates the composition sum over derivative splittings and power
    insertions; d^n/ds^n (X_s^*)^{|k|} is the adjoint-side recursion.
    """
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    if n > numerics.partition_cap:
        raise PartitionOverflow(f"order {n} exceeds cap {numerics.partition_cap}")
    if abs(k) * (n + 1) ** 2 * path.dim**3 > numerics.moi_term_limit:
        raise PartitionOverflow(
            f"power {k} at order {n} and dim {path.dim} exceeds the work budget"
        )
    if k == 0:
        return np.zeros((path.dim, path.dim), dtype=np.complex128)
    x = path.point(s)
    rows = _power_derivative_rows(x, path.generator.matrix, n, abs(k), adjoint=k < 0)
    return rows[abs(k)][n] * factorial(n)


def derivative_mult(
    path: MultiplicativePath,
    f: LaurentPolynomial,
    n: int,
    s: float = 0.0,
    numerics: Numerics = DEFAULTS,
) -> np.ndarray:
    """n-th derivative of f(U_s) along a multiplicative unitary path.

    Multilinear-integral form: i^n times the sum over compositions
    l_1 + ... + l_r = n of n!/(l_1! ... l_r!) applied to the order-r
    divided difference with slots A^{l_i} U_s. Only defined for unitary
    paths; contraction paths differentiate through powers instead.
    """
    if path.kind != "unitary":
        raise ValueError("multilinear derivative form requires a unitary path")
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    if n > numerics.partition_cap:
        raise PartitionOverflow(f"order {n} exceeds cap {numerics.partition_cap}")
    a = path.generator.matrix
    u_s = path.point(s)
    if np.max(np.abs(a)) == 0.0:
        return np.zeros_like(u_s)
    dec = spectral_decompose(u_s, numerics.cluster_tol, numerics.normal_tol)
    apow = [np.eye(path.dim, dtype=np.complex128)]
    for _ in range(n):
        apow.append(apow[-1] @ a)
    total = np.zeros_like(u_s)
    for r in range(1, n + 1):
        sym = LaurentDividedDifference(f, r)
        decs = [dec] * (r + 1)
        for comp in compositions(n, r):
            coeff = factorial(n)
            for l in comp:
                coeff //= factorial(l)
            args = [apow[l] @ u_s for l in comp]
            total += coeff * moi_apply(sym, decs, args, numerics).matrix
    return (1j**n) * total


def remainder_monomials(
    path: MultiplicativePath,
    n: int,
    kmax: int,
    numerics: Numerics = DEFAULTS,
):
    """Taylor remainders of all monomials z^k, 0 < |k| <= kmax.

    Returns {k: R(z^k)} for k in [-kmax, kmax] without 0. The negative
    side is computed by its own adjoint recursion, so equality with the
    conjugate transpose of the positive side is a genuine check.
    """
    if n < 2:
        raise ValueError("remainder order must be >= 2")
    if n - 1 > numerics.partition_cap:
        raise PartitionOverflow(f"order {n} exceeds cap {numerics.partition_cap}")
    x0 = path.base.matrix
    g = path.generator.matrix
    x1 = path.point(1.0)
    out = {}
    rows = _power_derivative_rows(x0, g, n - 1, kmax, adjoint=False)
    rows_adj = _power_derivative_rows(x0, g, n - 1, kmax, adjoint=True)
    xp = np.eye(x0.shape[0], dtype=np.complex128)
    xp_adj = xp.copy()
    x1h = x1.conj().T
    for k in range(1, kmax + 1):
        xp = xp @ x1
        xp_adj = xp_adj @ x1h
        out[k] = xp - sum(rows[k][l] for l in range(n))
        out[-k] = xp_adj - sum(rows_adj[k][l] for l in range(n))
    return out


def remainder_mult(
    path: MultiplicativePath,
    f: LaurentPolynomial,
    n: int,
    numerics: Numerics = DEFAULTS,
) -> TaylorRemainder:
    """Taylor remainder of f along the multiplicative path.

    f(X_1) - f(X_0) - sum_{l<n} (1/l!) d^l/ds^l f(X_s) at s=0, assembled
    term-by-term over Fourier coefficients; negative degrees act through
    adjoint powers.
    """
    kmax = f.max_abs_degree
    d = path.dim
    total = np.zeros((d, d), dtype=np.complex128)
    if kmax > 0:
        monos = remainder_monomials(path, n, kmax, numerics)
        for k, c in f.coeffs.items():
            if k != 0:
                total += c * monos[k]
    kind = "mult-unitary" if path.kind == "unitary" else "mult-contraction"
    return TaylorRemainder(matrix=total, kind=kind, order=n)


def remainder_lin(
    u0,
    u1,
    f: LaurentPolynomial,
    n: int,
    numerics: Numerics = DEFAULTS,
) -> TaylorRemainder:
    """Modified Taylor remainder along the linear path between unitaries.

    Subtracts the multilinear-integral polynomial terms instead of path
    derivatives:

        f(U_1) - f(U_0) - sum_{k<n} T_{f^[k]}^{U_0..U_0}(dU, ..., dU).

    Also evaluates the collapsed single-integral form
    T_{f^[n]}^{U_0,U_1,U_0..}(dU, ..., dU) and records the max-norm gap
    between the two computations.
    """
    m0 = u0.matrix if isinstance(u0, UnitaryOperator) else as_matrix(u0)
    m1 = u1.matrix if isinstance(u1, UnitaryOperator) else as_matrix(u1)
    if m0.shape != m1.shape:
        raise DimensionMismatch("unitaries of unequal dimension")
    if n < 2:
        raise ValueError("remainder order must be >= 2")
    d0 = spectral_decompose(m0, numerics.cluster_tol, numerics.normal_tol)
    d1 = spectral_decompose(m1, numerics.cluster_tol, numerics.normal_tol)
    delta = m1 - m0
    direct = d1.apply_function([f(lam) for lam in d1.eigenvalues]) - d0.apply_function(
        [f(lam) for lam in d0.eigenvalues]
    )
    for k in range(1, n):
        sym = LaurentDividedDifference(f, k)
        direct = direct - moi_apply(sym, [d0] * (k + 1), [delta] * k, numerics).matrix
    closed = moi_apply(
        LaurentDividedDifference(f, n),
        [d0, d1] + [d0] * (n - 1),
        [delta] * n,
        numerics,
    ).matrix
    residual = float(np.max(np.abs(direct - closed)))
    return TaylorRemainder(matrix=direct, kind="linear", order=n, closed_form_residual=residual)


def remainder_quadrature(
    path: MultiplicativePath,
    f: LaurentPolynomial,
    n: int,
    nodes: int | None = None,
    numerics: Numerics = DEFAULTS,
):
    """Integral form of the multiplicative remainder, Gauss-Legendre in s.

    (1/(n-1)!) int_0^1 (1-t)^{n-1} d^n/ds^n f(U_s)|_{s=t} dt for a unitary
    path; the integrand is analytic in t, so the fixed-node rule converges
    spectrally. Returns (matrix, trace).
    """
    if path.kind != "unitary":
        raise ValueError("integral remainder form requires a unitary path")
    nodes = numerics.quad_nodes if nodes is None else int(nodes)
    if nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    d = path.dim
    total = np.zeros((d, d), dtype=np.complex128)
    trace = 0.0 + 0.0j
    for ti, wi in zip(t, w):
        deriv = derivative_mult(path, f, n, float(ti), numerics)
        weight = wi * (1.0 - ti) ** (n - 1)
        total += weight * deriv
        trace += weight * np.trace(deriv)
    scale = 1.0 / factorial(n - 1)
    return scale * total, complex(scale * trace)
