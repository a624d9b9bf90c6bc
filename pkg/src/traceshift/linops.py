"""Dense complex-matrix operator algebra.

Validation of operator classes, spectral decomposition of normal matrices,
Hermitian functional calculus, Schatten norms and defect operators. All
values are immutable after construction and every function is pure, so
concurrent use is unrestricted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS
from .errors import (
    ClassViolation,
    ClusterAmbiguity,
    DimensionMismatch,
    InvalidP,
    NegativeEigenvalue,
    NotNormal,
)

__all__ = [
    "as_matrix",
    "UnitaryOperator",
    "ContractionOperator",
    "SelfAdjointOperator",
    "SpectralDecomposition",
    "validate",
    "spectral_decompose",
    "matrix_exp_i",
    "schatten_norm",
    "operator_norm",
    "max_norm",
    "defect_pair",
    "hermitian_function",
    "load_matrix",
    "save_matrix",
    "matrix_to_json",
    "matrix_from_json",
]


def as_matrix(entries) -> np.ndarray:
    """Coerce to a square complex matrix with finite entries."""
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValueError("matrix entries must be finite")
    return m


def max_norm(m: np.ndarray) -> float:
    """Entrywise max-norm."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class UnitaryOperator:
    """Square matrix with ||U*U - I||_max and ||UU* - I||_max below tolerance."""

    matrix: np.ndarray
    tolerance: float = DEFAULTS.class_tol

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ContractionOperator:
    """Square matrix with largest singular value at most 1 + tolerance."""

    matrix: np.ndarray
    tolerance: float = DEFAULTS.class_tol

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SelfAdjointOperator:
    """Square matrix with ||M - M*||_max below tolerance."""

    matrix: np.ndarray
    tolerance: float = DEFAULTS.class_tol

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


_CLASS_DEFECTS = {
    "unitary": lambda m: max(
        max_norm(m.conj().T @ m - np.eye(m.shape[0])),
        max_norm(m @ m.conj().T - np.eye(m.shape[0])),
    ),
    "contraction": lambda m: max(operator_norm(m) - 1.0, 0.0),
    "selfadjoint": lambda m: max_norm(m - m.conj().T),
}

_CLASS_TYPES = {
    "unitary": UnitaryOperator,
    "contraction": ContractionOperator,
    "selfadjoint": SelfAdjointOperator,
}


def validate(entries, kind: str, tol: float = DEFAULTS.class_tol):
    """Return the typed wrapper iff the class invariant holds at ``tol``.

    Parameters
    ----------
    entries : array_like
        Square complex matrix.
    kind : {"unitary", "contraction", "selfadjoint"}
    tol : float
        Accepted defect.

    Raises
    ------
    ClassViolation
        With the measured defect when the invariant fails.
    """
    m = as_matrix(entries)
    if kind not in _CLASS_DEFECTS:
        raise ValueError(f"unknown operator class {kind!r}")
    defect = _CLASS_DEFECTS[kind](m)
    if defect > tol:
        raise ClassViolation(kind, defect, tol)
    return _CLASS_TYPES[kind](matrix=m, tolerance=tol)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and orthogonal eigenprojections of a normal matrix.

    ``basis`` holds an orthonormal eigenbasis with columns grouped by
    cluster and ``cluster_of_column[j]`` maps column j to its cluster
    index; both are redundant with ``projections`` but keep the joint
    eigen-sum cheap.
    """

    eigenvalues: np.ndarray
    projections: tuple
    basis: np.ndarray = field(repr=False)
    cluster_of_column: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def apply_function(self, values) -> np.ndarray:
        """Assemble sum_j values[j] * P_j for per-cluster scalars."""
        vals = np.asarray(values, dtype=np.complex128)[self.cluster_of_column]
        return (self.basis * vals) @ self.basis.conj().T


def _cluster_eigenvalues(lam: np.ndarray, cluster_tol: float):
    """Greedy chaining of eigenvalues closer than ``cluster_tol``.

    Raises ClusterAmbiguity when chained merging produces a cluster whose
    diameter exceeds 10x the tolerance, i.e. when the merged multiplicity
    depends on the chaining order.
    """
    order = np.lexsort((lam.imag, lam.real))
    groups = [[order[0]]]
    for idx in order[1:]:
        if abs(lam[idx] - lam[groups[-1][-1]]) <= cluster_tol:
            groups[-1].append(idx)
        else:
            placed = False
            for g in groups:
                if any(abs(lam[idx] - lam[j]) <= cluster_tol for j in g):
                    g.append(idx)
                    placed = True
                    break
            if not placed:
                groups.append([idx])
    for g in groups:
        diam = max(abs(lam[a] - lam[b]) for a in g for b in g)
        if diam > 10.0 * cluster_tol:
            raise ClusterAmbiguity(
                f"cluster diameter {diam:.3e} exceeds 10x cluster_tol {cluster_tol:.3e}"
            )
    return groups


def spectral_decompose(
    entries,
    cluster_tol: float = DEFAULTS.cluster_tol,
    normal_tol: float = DEFAULTS.normal_tol,
) -> SpectralDecomposition:
    """Spectral decomposition of a normal matrix with eigenvalue clustering.

    Eigenvalues within ``cluster_tol`` are merged into one projection; the
    reported eigenvalue of a cluster is the mean of its members.

    Raises
    ------
    NotNormal
        When ||MM* - M*M||_max exceeds ``normal_tol``.
    ClusterAmbiguity
        When merging changes multiplicity non-uniquely.
    """
    m = as_matrix(entries)
    comm = max_norm(m @ m.conj().T - m.conj().T @ m)
    if comm > normal_tol:
        raise NotNormal(f"commutator max-norm {comm:.3e} > {normal_tol:.3e}")

    if max_norm(m - m.conj().T) <= normal_tol:
        # Hermitian path: eigh is cheaper and more accurate.
        lam, q = np.linalg.eigh((m + m.conj().T) / 2.0)
        lam = lam.astype(np.complex128)
    else:
        # Schur form of a normal matrix is diagonal with unitary Q.
        import scipy.linalg

        t, q = scipy.linalg.schur(m, output="complex")
        lam = np.diag(t).copy()

    groups = _cluster_eigenvalues(lam, cluster_tol)
    col_order = [j for g in groups for j in g]
    basis = np.ascontiguousarray(q[:, col_order])
    cluster_of_column = np.concatenate(
        [np.full(len(g), i, dtype=np.intp) for i, g in enumerate(groups)]
    )
    eigenvalues = np.array([np.mean(lam[g]) for g in groups], dtype=np.complex128)
    if len(eigenvalues) > 1:
        diffs = np.abs(eigenvalues[:, None] - eigenvalues[None, :])
        np.fill_diagonal(diffs, np.inf)
        if diffs.min() < cluster_tol:
            raise ClusterAmbiguity(
                f"cluster representatives separated by {diffs.min():.3e} < {cluster_tol:.3e}"
            )

    projections = []
    start = 0
    for g in groups:
        cols = basis[:, start : start + len(g)]
        projections.append(cols @ cols.conj().T)
        start += len(g)
    return SpectralDecomposition(
        eigenvalues=eigenvalues,
        projections=tuple(projections),
        basis=basis,
        cluster_of_column=cluster_of_column,
    )


def hermitian_function(a: np.ndarray, fn) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix via eigh."""
    lam, q = np.linalg.eigh(a)
    return (q * fn(lam)) @ q.conj().T


def matrix_exp_i(
    a: SelfAdjointOperator | np.ndarray,
    s: float = 1.0,
    tol: float = DEFAULTS.class_tol,
) -> UnitaryOperator:
    """exp(i s A) for self-adjoint A, through the Hermitian eigendecomposition.

    The result is validated as unitary at ``tol``.
    """
    m = a.matrix if isinstance(a, SelfAdjointOperator) else as_matrix(a)
    h = (m + m.conj().T) / 2.0
    u = hermitian_function(h, lambda lam: np.exp(1j * s * lam))
    return validate(u, "unitary", tol)


def schatten_norm(entries, p) -> float:
    """l_p norm of the singular values; p >= 1 or p = inf."""
    m = as_matrix(entries)
    sv = np.linalg.svd(m, compute_uv=False)
    if p == np.inf or p == "inf":
        return float(sv[0]) if sv.size else 0.0
    p = float(p)
    if not p >= 1.0:
        raise InvalidP(f"p must be >= 1 or inf, got {p}")
    return float(np.sum(sv**p) ** (1.0 / p))


def defect_pair(
    t: ContractionOperator | np.ndarray,
    clamp_tol: float = DEFAULTS.defect_clamp_tol,
):
    """Principal square roots of I - T*T and I - TT*.

    Eigenvalues in [-clamp_tol, 0) are clamped to 0 (roundoff on
    contractions with norm close to 1); anything below raises.
    """
    m = t.matrix if isinstance(t, ContractionOperator) else as_matrix(t)
    eye = np.eye(m.shape[0])

    def psd_sqrt(h):
        h = (h + h.conj().T) / 2.0
        lam, q = np.linalg.eigh(h)
        if np.any(lam < -clamp_tol):
            raise NegativeEigenvalue(
                f"defect eigenvalue {lam.min():.3e} below -clamp_tol {-clamp_tol:.3e}"
            )
        lam = np.clip(lam, 0.0, None)
        return (q * np.sqrt(lam)) @ q.conj().T

    return psd_sqrt(eye - m.conj().T @ m), psd_sqrt(eye - m @ m.conj().T)


def matrix_to_json(m: np.ndarray) -> dict:
    """Row-major {"dim": d, "entries": [[[re, im], ...], ...]} encoding."""
    m = as_matrix(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    d = int(obj["dim"])
    m = np.array(
        [[complex(re, im) for re, im in row] for row in obj["entries"]],
        dtype=np.complex128,
    )
    if m.shape != (d, d):
        raise DimensionMismatch(f"declared dim {d} but entries shape {m.shape}")
    return m


def save_matrix(path, m: np.ndarray) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))
