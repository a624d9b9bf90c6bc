"""Truncated block unitary dilation of a contraction path.

The dilation acts on H^N + H + H^N (depth-N truncations of the two shift
spaces). Block layout, with S the truncated shift and P picking the first
shift slot:

    [ S*        0    0 ]
    [ D_{T*} P  T    0 ]
    [ -T* P     D_T  S ]

The matrix is block lower triangular, so middle blocks of powers equal
powers of T exactly at any depth; truncation breaks isometry of S only in
the last shift slot, which none of the compressions consulted here reach
for powers below the depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS, Numerics
from .errors import DepthTooSmall, DimensionMismatch
from .linops import ContractionOperator, SelfAdjointOperator, as_matrix, defect_pair
from .paths import MultiplicativePath, TaylorRemainder, remainder_mult
from .symbols import LaurentPolynomial

__all__ = [
    "SchafferDilation",
    "build_dilation",
    "embed_generator",
    "compress_middle",
    "block_trace",
    "dilated_remainder",
]


@dataclass(frozen=True)
class SchafferDilation:
    """Truncated dilation matrix with its block geometry."""

    inner_dim: int
    depth: int
    matrix: np.ndarray

    @property
    def total_dim(self) -> int:
        return self.inner_dim * (2 * self.depth + 1)

    @property
    def middle(self) -> slice:
        d, n = self.inner_dim, self.depth
        return slice(n * d, (n + 1) * d)


def build_dilation(
    t0: ContractionOperator | np.ndarray,
    depth: int,
    numerics: Numerics = DEFAULTS,
) -> SchafferDilation:
    """Assemble the truncated dilation of a contraction.

    The unitarity defect is confined to the last slot of each truncated
    shift space.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    t = t0.matrix if isinstance(t0, ContractionOperator) else as_matrix(t0)
    d = t.shape[0]
    dt, dts = defect_pair(t, numerics.defect_clamp_tol)
    n = depth
    total = d * (2 * n + 1)
    u = np.zeros((total, total), dtype=np.complex128)

    def blk(i, j):
        return (slice(i * d, (i + 1) * d), slice(j * d, (j + 1) * d))

    # incoming shift space: slots 0..n-1, adjoint shift moves toward slot 0
    for j in range(n - 1):
        u[blk(j, j + 1)] = np.eye(d)
    mid = n
    u[blk(mid, 0)] = dts          # D_{T*} P
    u[blk(mid, mid)] = t
    u[blk(mid + 1, 0)] = -t.conj().T  # -T* P into first outgoing slot
    u[blk(mid + 1, mid)] = dt         # D_T into first outgoing slot
    # outgoing shift space: slots n+1..2n, shift moves away from the middle
    for j in range(n - 1):
        u[blk(mid + 2 + j, mid + 1 + j)] = np.eye(d)
    return SchafferDilation(inner_dim=d, depth=depth, matrix=u)


def embed_generator(b: SelfAdjointOperator | np.ndarray, depth: int) -> np.ndarray:
    """Zero-padded generator diag(0, B, 0) on the dilation space.

    Zero padding preserves singular values, so every Schatten norm of the
    embedding equals that of B.
    """
    m = b.matrix if isinstance(b, SelfAdjointOperator) else as_matrix(b)
    d = m.shape[0]
    total = d * (2 * depth + 1)
    a = np.zeros((total, total), dtype=np.complex128)
    s = slice(depth * d, (depth + 1) * d)
    a[s, s] = m
    return a


def compress_middle(m: np.ndarray, inner_dim: int, depth: int) -> np.ndarray:
    """Middle inner_dim x inner_dim block: Q_H M restricted to H."""
    m = as_matrix(m)
    if m.shape[0] != inner_dim * (2 * depth + 1):
        raise DimensionMismatch(
            f"matrix dim {m.shape[0]} != {inner_dim * (2 * depth + 1)}"
        )
    s = slice(depth * inner_dim, (depth + 1) * inner_dim)
    return m[s, s].copy()


def block_trace(m: np.ndarray, inner_dim: int, depth: int):
    """Traces of the three diagonal blocks; total = top + middle + bottom."""
    m = as_matrix(m)
    if m.shape[0] != inner_dim * (2 * depth + 1):
        raise DimensionMismatch(
            f"matrix dim {m.shape[0]} != {inner_dim * (2 * depth + 1)}"
        )
    lo = depth * inner_dim
    hi = (depth + 1) * inner_dim
    diag = np.diag(m)
    top = complex(np.sum(diag[:lo]))
    middle = complex(np.sum(diag[lo:hi]))
    bottom = complex(np.sum(diag[hi:]))
    return top + middle + bottom, top, middle, bottom


def dilated_remainder(
    t0: ContractionOperator,
    b: SelfAdjointOperator,
    f: LaurentPolynomial,
    n: int,
    depth: int,
    numerics: Numerics = DEFAULTS,
):
    """Taylor remainder on the dilation space beside the contraction one.

    Returns (R_U, R_T, trace_gap) where R_U is the remainder of the
    dilated multiplicative path, R_T the remainder of the contraction
    path, and trace_gap = |Tr R_U - Tr R_T|. The depth must exceed the
    top Fourier degree of f so the truncated and untruncated dilations
    agree on every block the remainder consults.
    """
    kmax = f.max_abs_degree
    if depth < kmax + 1:
        raise DepthTooSmall(f"depth {depth} < max degree {kmax} + 1")
    dil = build_dilation(t0, depth, numerics)
    a = embed_generator(b, depth)
    # The truncated dilation has one zero column at the boundary, so it is
    # a contraction of norm exactly 1 rather than a unitary; the power
    # calculus below is the same either way.
    dil_path = MultiplicativePath(
        base=ContractionOperator(dil.matrix, tolerance=1e-8),
        generator=SelfAdjointOperator(a),
    )
    r_u = remainder_mult(dil_path, f, n, numerics)
    path = MultiplicativePath(base=t0, generator=b)
    r_t = remainder_mult(path, f, n, numerics)
    gap = abs(complex(np.trace(r_u.matrix)) - complex(np.trace(r_t.matrix)))
    return (
        TaylorRemainder(matrix=r_u.matrix, kind="mult-unitary", order=n),
        r_t,
        float(gap),
    )
