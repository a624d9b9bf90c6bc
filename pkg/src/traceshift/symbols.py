"""Scalar function layer on the unit circle.

Laurent polynomials (finitely supported Fourier coefficients) are the
computable function class: every trace identity in this package is linear
in the coefficients, so finite support loses no verification power.
Divided differences are evaluated through closed forms built on complete
homogeneous symmetric polynomials, which stay exact at coincident points;
the textbook recursion is provided separately for cross-checks and for
symbols that are only available through point evaluations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SpectrumTooClustered

__all__ = [
    "LaurentPolynomial",
    "DiskPoint",
    "derivative",
    "divided_difference",
    "divided_difference_recursive",
    "monomial_divided_difference",
    "complete_homogeneous",
    "class_norm",
    "split_plus_minus",
    "contour_pair",
    "poisson_eval",
]


class LaurentPolynomial:
    """Finitely supported Fourier coefficients ``{degree: coefficient}``.

    Zero coefficients are dropped from the map.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean = {}
        for k, c in dict(coeffs or {}).items():
            c = complex(c)
            if c != 0:
                clean[int(k)] = c
        self.coeffs = clean

    @classmethod
    def monomial(cls, degree: int, coeff=1.0) -> "LaurentPolynomial":
        return cls({degree: coeff})

    def __call__(self, z) -> complex:
        z = complex(z)
        return sum(c * z**k for k, c in self.coeffs.items())

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return LaurentPolynomial(out)

    def __mul__(self, scalar) -> "LaurentPolynomial":
        return LaurentPolynomial({k: scalar * c for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPolynomial) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self.coeffs!r})"

    @property
    def support(self):
        return sorted(self.coeffs)

    @property
    def max_abs_degree(self) -> int:
        return max((abs(k) for k in self.coeffs), default=0)

    def conjugate_reflect(self) -> "LaurentPolynomial":
        """Coefficient map of conj(f(z)) restricted to the circle."""
        return LaurentPolynomial({-k: np.conj(c) for k, c in self.coeffs.items()})

    def to_json(self) -> dict:
        return {
            "coeffs": {
                str(k): [float(c.real), float(c.imag)] for k, c in sorted(self.coeffs.items())
            }
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LaurentPolynomial":
        return cls({int(k): complex(re, im) for k, (re, im) in obj["coeffs"].items()})

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "LaurentPolynomial":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class DiskPoint:
    """Point of the closed unit disk."""

    z: complex

    def __post_init__(self):
        if abs(self.z) > 1.0 + 1e-15:
            raise ValueError(f"|z| = {abs(self.z)} exceeds 1")


def derivative(f: LaurentPolynomial, order: int = 1) -> LaurentPolynomial:
    """Exact coefficient map of the ``order``-th complex derivative."""
    if order < 0:
        raise ValueError("derivative order must be >= 0")
    out = {}
    for m, c in f.coeffs.items():
        w = c
        for j in range(order):
            w *= m - j
        if w != 0:
            out[m - order] = out.get(m - order, 0) + w
    return LaurentPolynomial(out)


def falling_factorial(m: int, k: int) -> int:
    """m (m-1) ... (m-k+1), the k-th derivative weight of z^m."""
    out = 1
    for j in range(k):
        out *= m - j
    return out


def complete_homogeneous(degree: int, points) -> complex:
    """Complete homogeneous symmetric polynomial h_degree(points).

    h_0 = 1 and h_d = 0 for d < 0. Evaluated by the stable recursion
    h_d(x_0..x_i) = h_d(x_0..x_{i-1}) + x_i h_{d-1}(x_0..x_i).
    """
    if degree < 0:
        return 0.0 + 0.0j
    # row[d] holds h_d of the prefix processed so far
    row = np.zeros(degree + 1, dtype=np.complex128)
    row[0] = 1.0
    for x in points:
        for d in range(1, degree + 1):
            row[d] += x * row[d - 1]
    return complex(row[degree])


def monomial_divided_difference(m: int, points) -> complex:
    """Divided difference of z^m over the given points, any sign of m.

    For m >= 0 this is h_{m-n}(points) with n+1 points; for m < 0 it is
    (-1)^n h_{|m|-1}(1/points) / prod(points). Both closed forms are
    polynomial in the points (resp. their reciprocals), hence exact at
    coincident points.
    """
    pts = np.asarray(points, dtype=np.complex128)
    n = len(pts) - 1
    if m >= 0:
        return complete_homogeneous(m - n, pts)
    inv = 1.0 / pts
    return complex((-1) ** n * complete_homogeneous(-m - 1, inv) * np.prod(inv))


def divided_difference(f: LaurentPolynomial, points, cluster_tol: float = 0.0) -> complex:
    """Divided difference of ``f`` of order len(points) - 1.

    Evaluates by linearity over monomials using closed forms, so confluent
    tuples are handled exactly. Points are expected on the unit circle
    within 1e-8; ``cluster_tol`` is accepted for interface parity with the
    recursive evaluator and is not needed by the closed forms.
    """
    pts = np.asarray(points, dtype=np.complex128)
    if np.any(np.abs(np.abs(pts) - 1.0) > 1e-8):
        raise ValueError("divided-difference points must lie on the unit circle")
    return complex(
        sum(c * monomial_divided_difference(m, pts) for m, c in f.coeffs.items())
    )


def divided_difference_recursive(fn, points, separation: float = 1e-12) -> complex:
    """Textbook recursive divided difference from point evaluations.

    ``fn`` is any scalar callable. Pairwise-separated points are required;
    confluent tuples raise :class:`SpectrumTooClustered` because the
    recursion divides by point differences.
    """
    pts = [complex(p) for p in points]
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(pts[i] - pts[j]) < separation:
                raise SpectrumTooClustered(
                    f"points {pts[i]} and {pts[j]} are closer than {separation}"
                )
    table = [complex(fn(p)) for p in pts]
    for level in range(1, n):
        table = [
            (table[i] - table[i + 1]) / (pts[i] - pts[i + level])
            for i in range(n - level)
        ]
    return table[0]


def class_norm(f: LaurentPolynomial, n: int) -> float:
    """Weighted coefficient sum: sum over k of |k|^n |f_hat(k)|.

    With the convention 0^0 = 1, so n = 0 gives the plain coefficient sum.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    total = 0.0
    for k, c in f.coeffs.items():
        w = 1.0 if (k == 0 and n == 0) else float(abs(k)) ** n
        total += w * abs(c)
    return total


def split_plus_minus(f: LaurentPolynomial):
    """Split into (degrees >= 0, degrees <= -1); the sum recombines exactly."""
    plus = {k: c for k, c in f.coeffs.items() if k >= 0}
    minus = {k: c for k, c in f.coeffs.items() if k <= -1}
    return LaurentPolynomial(plus), LaurentPolynomial(minus)


def contour_pair(f: LaurentPolynomial, eta: LaurentPolynomial) -> complex:
    """Contour integral of f(z) eta(z) dz over the unit circle.

    Exact value 2*pi*i * sum_k f_hat(k) eta_hat(-k-1), since the only
    surviving monomial pairing is z^a z^b with a + b = -1.
    """
    total = 0.0 + 0.0j
    for k, c in f.coeffs.items():
        other = eta.coeffs.get(-k - 1)
        if other is not None:
            total += c * other
    return 2j * np.pi * total


def poisson_eval(f: LaurentPolynomial, z):
    """Poisson (harmonic) extension of ``f`` at a point of the closed disk.

    Returns ``(value, d/dz, d/dzbar)`` of
    f_hat(0) + sum_{q>=1} f_hat(-q) zbar^q + sum_{q>=1} f_hat(q) z^q.
    """
    if isinstance(z, DiskPoint):
        z = z.z
    z = complex(z)
    if abs(z) > 1.0 + 1e-15:
        raise ValueError("Poisson extension requires |z| <= 1")
    zb = np.conj(z)
    value = 0.0 + 0.0j
    dz = 0.0 + 0.0j
    dzb = 0.0 + 0.0j
    for k, c in f.coeffs.items():
        if k == 0:
            value += c
        elif k > 0:
            value += c * z**k
            dz += c * k * z ** (k - 1)
        else:
            q = -k
            value += c * zb**q
            dzb += c * q * zb ** (q - 1)
    return value, dz, dzb
