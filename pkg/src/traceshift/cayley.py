"""Cayley-transform bridge between circle and real-line trace identities.

Carries dissipative operators to contractions and self-adjoint operators
to unitaries, builds the change-of-variables densities on the real line,
and evaluates the real-line right-hand sides in two modes: an exact
pullback to the circle and an independent quadrature along the Cayley
parametrization of the line.

Divided differences of pulled-back functions psi(x) = f((x+i)/(x-i)) are
evaluated in closed form: binomial expansion of Cayley powers in
1/(x -+ i) turns them into shifted-monomial divided differences, which are
polynomial in those reciprocals and therefore exact at coincident points.
The textbook recursion from point values remains available as a
cross-check on separated tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .config import DEFAULTS, Numerics
from .errors import (
    ClassViolation,
    OnePointSpectrum,
    QuadratureDivergence,
    SingularFactor,
    SingularResolvent,
)
from .linops import (
    ContractionOperator,
    SelfAdjointOperator,
    as_matrix,
    hermitian_function,
    max_norm,
    validate,
)
from .moi import MoiSymbol
from .symbols import LaurentPolynomial, derivative, contour_pair

__all__ = [
    "DissipativeOperator",
    "GammaDensity",
    "validate_dissipative",
    "cayley",
    "inverse_cayley",
    "cayley_point",
    "inverse_cayley_point",
    "selfadjoint_pair_to_unitaries",
    "resolvent_chain",
    "MobiusDividedDifference",
    "mobius_divided_difference",
    "rhs_real_line",
]


@dataclass(frozen=True)
class DissipativeOperator:
    """Matrix whose imaginary part (L - L*)/(2i) is negative semidefinite."""

    matrix: np.ndarray
    tolerance: float = DEFAULTS.class_tol

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def validate_dissipative(entries, tol: float = DEFAULTS.class_tol) -> DissipativeOperator:
    """Check Im<Lx, x> <= tol for all unit x, i.e. lam_max((L - L*)/2i) <= tol."""
    m = as_matrix(entries)
    imag_part = (m - m.conj().T) / 2j
    top = float(np.max(np.linalg.eigvalsh(imag_part)))
    if top > tol:
        raise ClassViolation("dissipative", top, tol)
    return DissipativeOperator(matrix=m, tolerance=tol)


def cayley_point(lam: complex) -> complex:
    """Scalar Cayley transform (lam + i) / (lam - i)."""
    return (lam + 1j) / (lam - 1j)


def inverse_cayley_point(z: complex) -> complex:
    """Scalar inverse Cayley transform i (z + 1) / (z - 1)."""
    return 1j * (z + 1) / (z - 1)


def cayley(
    l: DissipativeOperator | np.ndarray,
    tol: float = 1e-10,
    numerics: Numerics = DEFAULTS,
) -> ContractionOperator:
    """Cayley transform T = (L + iI)(L - iI)^{-1} of a dissipative matrix.

    The result is validated as a contraction and 1 is checked to stay away
    from its spectrum by ``numerics.eigenvalue_margin``.
    """
    m = l.matrix if isinstance(l, DissipativeOperator) else as_matrix(l)
    eye = np.eye(m.shape[0])
    denom = m - 1j * eye
    if np.linalg.cond(denom) > 1e13:
        raise SingularResolvent("L - iI is numerically singular")
    t = np.linalg.solve(denom.conj().T, (m + 1j * eye).conj().T).conj().T
    out = validate(t, "contraction", tol)
    margin = float(np.min(np.abs(1.0 - np.linalg.eigvals(t))))
    if margin < numerics.eigenvalue_margin:
        raise OnePointSpectrum(f"1 is within {margin:.3e} of the spectrum of T")
    return out


def inverse_cayley(
    t: ContractionOperator | np.ndarray,
    numerics: Numerics = DEFAULTS,
) -> np.ndarray:
    """Inverse Cayley transform L = i (T + I)(T - I)^{-1}.

    Requires min |1 - spec(T)| >= numerics.eigenvalue_margin.
    """
    m = t.matrix if isinstance(t, ContractionOperator) else as_matrix(t)
    eye = np.eye(m.shape[0])
    margin = float(np.min(np.abs(1.0 - np.linalg.eigvals(m))))
    if margin < numerics.eigenvalue_margin:
        raise OnePointSpectrum(
            f"min |1 - spec(T)| = {margin:.3e} < margin {numerics.eigenvalue_margin:.3e}"
        )
    return 1j * np.linalg.solve((m - eye).conj().T, (m + eye).conj().T).conj().T


def selfadjoint_pair_to_unitaries(
    h0: SelfAdjointOperator | np.ndarray,
    v: SelfAdjointOperator | np.ndarray,
    tol: float = 1e-10,
):
    """Cayley unitaries of H_0 and H_1 = H_0 + V.

    Computed through the Hermitian eigendecomposition, so the results are
    unitary to eigensolver accuracy. The difference identity
    U_1 - U_0 = -2i (H_1 - iI)^{-1} V (H_0 - iI)^{-1} is verified before
    returning.
    """
    m0 = h0.matrix if isinstance(h0, SelfAdjointOperator) else as_matrix(h0)
    mv = v.matrix if isinstance(v, SelfAdjointOperator) else as_matrix(v)
    m1 = m0 + mv
    u0 = hermitian_function((m0 + m0.conj().T) / 2, cayley_point)
    u1 = hermitian_function((m1 + m1.conj().T) / 2, cayley_point)
    eye = np.eye(m0.shape[0])
    expected = -2j * np.linalg.solve(m1 - 1j * eye, mv) @ np.linalg.inv(m0 - 1j * eye)
    gap = max_norm((u1 - u0) - expected)
    if gap > 1e-8:
        raise SingularResolvent(f"difference identity residual {gap:.3e}")
    return validate(u0, "unitary", tol), validate(u1, "unitary", tol)


def resolvent_chain(
    h0: SelfAdjointOperator | np.ndarray,
    v: SelfAdjointOperator | np.ndarray,
    j_set,
) -> list:
    """Slot matrices carrying the linear-path remainder to the resolvent side.

    With Omega = (I - V (H_1 - iI)^{-1}) V and W = Omega (H_0 - iI)^{-1},
    the slot for j_l is W^(j_l - j_{l-1} - 1) Omega, j_0 = 0. The gap
    exponent makes consecutive indices contribute plain Omega factors,
    which is what the change of variables of the divided differences
    produces.
    """
    m0 = h0.matrix if isinstance(h0, SelfAdjointOperator) else as_matrix(h0)
    mv = v.matrix if isinstance(v, SelfAdjointOperator) else as_matrix(v)
    m1 = m0 + mv
    js = list(j_set)
    if js != sorted(js) or len(set(js)) != len(js) or (js and js[0] < 1):
        raise ValueError("j_set must be strictly increasing positive integers")
    eye = np.eye(m0.shape[0])
    try:
        r1 = np.linalg.inv(m1 - 1j * eye)
        r0 = np.linalg.inv(m0 - 1j * eye)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - shifted Hermitian
        raise SingularFactor(str(exc))
    omega = (eye - mv @ r1) @ mv
    w = omega @ r0
    out = []
    prev = 0
    for j in js:
        out.append(np.linalg.matrix_power(w, j - prev - 1) @ omega)
        prev = j
    return out


@dataclass(frozen=True)
class GammaDensity:
    """Real-line density gamma_k(x) = (x - i)^{-2} eta_k((x+i)/(x-i))."""

    k: int
    eta: LaurentPolynomial

    def __call__(self, lam) -> complex:
        lam = complex(lam)
        return self.eta(cayley_point(lam)) / (lam - 1j) ** 2


def _h_rows_grid(grids, max_degree):
    shape = tuple(g.shape[i] for i, g in enumerate(grids))
    rows = [np.ones(shape, dtype=np.complex128)]
    rows += [np.zeros(shape, dtype=np.complex128) for _ in range(max_degree)]
    for g in grids:
        for d in range(1, max_degree + 1):
            rows[d] = rows[d] + g * rows[d - 1]
    return rows


def _shifted_monomial_dd_grids(points_list, shift, max_j):
    """Divided-difference tensors of (x - shift)^{-j} for j = 0..max_j.

    points_list holds the per-slot point arrays; returns full tensors via
    the complete-homogeneous recursion in u = 1/(x - shift), exact at
    coincident points.
    """
    k = len(points_list) - 1
    grids = []
    for i, pts in enumerate(points_list):
        shape = [1] * (k + 1)
        shape[i] = len(pts)
        grids.append((1.0 / (np.asarray(pts, dtype=np.complex128) - shift)).reshape(shape))
    rows = _h_rows_grid(grids, max(max_j - 1, 0))
    prod = np.ones(tuple(g.shape[i] for i, g in enumerate(grids)), dtype=np.complex128)
    for g in grids:
        prod = prod * g
    sign = (-1) ** k
    out = [np.zeros_like(prod) for _ in range(max_j + 1)]
    if k == 0:
        out[0] = np.ones_like(prod)
    for j in range(1, max_j + 1):
        out[j] = sign * rows[j - 1] * prod
    return out


def _mobius_dd_grid(f: LaurentPolynomial, order: int, points_list):
    """Divided-difference tensor of psi(x) = f((x+i)/(x-i)).

    Cayley powers expand binomially in 1/(x - i) (positive degrees) or
    1/(x + i) (negative degrees); divided differences then act on shifted
    monomials only.
    """
    pos = [m for m in f.coeffs if m >= 0]
    neg = [-m for m in f.coeffs if m < 0]
    shape = tuple(len(p) for p in points_list)
    phi = np.zeros(shape, dtype=np.complex128)
    if pos:
        dd_u = _shifted_monomial_dd_grids(points_list, 1j, max(pos))
        for m in pos:
            c = f.coeffs[m]
            for j in range(0, m + 1):
                phi += c * comb(m, j) * (2j) ** j * dd_u[j]
    if neg:
        dd_v = _shifted_monomial_dd_grids(points_list, -1j, max(neg))
        for q in neg:
            c = f.coeffs[-q]
            for j in range(0, q + 1):
                phi += c * comb(q, j) * (-2j) ** j * dd_v[j]
    return phi


class MobiusDividedDifference(MoiSymbol):
    """Divided difference of a Cayley pullback, closed-form evaluation."""

    def __init__(self, f: LaurentPolynomial, order: int):
        self.f = f
        self.order = order
        self.arity = order + 1
        self.symmetric = True

    def evaluate(self, points) -> complex:
        grid = _mobius_dd_grid(self.f, self.order, [[p] for p in points])
        return complex(grid.reshape(-1)[0])

    def evaluate_grid(self, spectra) -> np.ndarray:
        return _mobius_dd_grid(self.f, self.order, [np.asarray(s) for s in spectra])


def mobius_divided_difference(f: LaurentPolynomial, points) -> complex:
    """Divided difference of psi(x) = f((x+i)/(x-i)) at the given points."""
    return MobiusDividedDifference(f, len(points) - 1).evaluate(points)


class _RationalFn:
    """N(z) / (z^a (z-1)^b) with exact differentiation and factor cancelling.

    Coefficient array ``num`` is ascending in z. Used to carry the
    real-line integrands through the substitution z = (x+i)/(x-i), where
    d/dx = (i/2) (z-1)^2 d/dz and (x - i) = 2i/(z-1).
    """

    __slots__ = ("num", "a", "b")

    def __init__(self, num, a: int, b: int):
        self.num = np.asarray(num, dtype=np.complex128)
        self.a = int(a)
        self.b = int(b)
        self._normalize()

    @classmethod
    def from_laurent(cls, f: LaurentPolynomial) -> "_RationalFn":
        if not f.coeffs:
            return cls([0.0], 0, 0)
        lo = min(f.coeffs)
        a = max(0, -lo)
        deg = max(f.coeffs) + a
        num = np.zeros(deg + 1, dtype=np.complex128)
        for m, c in f.coeffs.items():
            num[m + a] = c
        return cls(num, a, 0)

    def _normalize(self):
        num = np.trim_zeros(self.num, "b")
        if num.size == 0:
            self.num = np.zeros(1, dtype=np.complex128)
            self.a = 0
            self.b = 0
            return
        scale = float(np.max(np.abs(num)))
        # cancel z factors
        while self.a > 0 and abs(num[0]) <= 1e-14 * scale and num.size > 1:
            num = num[1:]
            self.a -= 1
        # cancel (z-1) factors by synthetic division when N(1) = 0
        while self.b > 0 and abs(np.sum(num)) <= 1e-12 * scale * num.size and num.size > 1:
            # divide ascending-coefficient polynomial by (z - 1)
            q = np.zeros(num.size - 1, dtype=np.complex128)
            carry = 0.0 + 0.0j
            for j in range(num.size - 1, 0, -1):
                carry = carry + num[j]
                q[j - 1] = carry
            num = q
            self.b -= 1
        self.num = num

    def times_power_z_minus_1(self, e: int) -> "_RationalFn":
        """Multiply by (z-1)^e, e of any sign."""
        if e >= 0:
            num = self.num
            for _ in range(e):
                num = np.convolve(num, np.array([-1.0, 1.0]))
            return _RationalFn(num, self.a, self.b)
        return _RationalFn(self.num, self.a, self.b - e)

    def scaled(self, c) -> "_RationalFn":
        return _RationalFn(self.num * c, self.a, self.b)

    def d_dlambda(self) -> "_RationalFn":
        """(i/2) (z-1)^2 d/dz applied once."""
        n = self.num
        dn = np.polynomial.polynomial.polyder(n) if n.size > 1 else np.zeros(1)
        # d/dz [N / (z^a (z-1)^b)] = [N' z (z-1) - N (a (z-1) + b z)] / (z^{a+1} (z-1)^{b+1})
        z_zm1 = np.array([0.0, -1.0, 1.0])  # z(z-1) ascending
        term1 = np.convolve(dn, z_zm1)
        lin = np.array([-self.a, self.a + self.b], dtype=np.complex128)  # a(z-1)+bz
        term2 = np.convolve(n, lin)
        num = np.zeros(max(term1.size, term2.size), dtype=np.complex128)
        num[: term1.size] += term1
        num[: term2.size] -= term2
        out = _RationalFn(num, self.a + 1, self.b + 1)
        return out.times_power_z_minus_1(2).scaled(0.5j)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        val = np.polynomial.polynomial.polyval(z, self.num)
        return val / (z**self.a * (z - 1.0) ** self.b)


def _real_line_integrand(f: LaurentPolynomial, gammas) -> "_RationalFn | None":
    """Sum over orders of the real-line integrand, as a rational in z.

    Term k: (i/2)^{k-1} (x-i)^k d^{k-1}/dx^{k-1}[(x-i)^k psi'(x)] gamma_k(x)
    with psi(x) = f(z(x)). Uses (x-i)^k psi' = -2i (2i)^{k-2} (z-1)^{2-k} f'(z)
    and iterates the exact rational derivative.
    """
    fprime = derivative(f, 1)
    total = None
    for gamma in gammas:
        k = gamma.k
        if not gamma.eta.coeffs or not fprime.coeffs:
            continue
        base = _RationalFn.from_laurent(fprime)
        base = base.times_power_z_minus_1(2 - k).scaled(-2j * (2j) ** (k - 2))
        for _ in range(k - 1):
            base = base.d_dlambda()
        term = base.times_power_z_minus_1(-k).scaled((2j) ** k * (0.5j) ** (k - 1))
        # gamma_k as a function of z: (x-i)^{-2} eta(z) = -(z-1)^2 eta(z) / 4
        eta_r = _RationalFn.from_laurent(gamma.eta).times_power_z_minus_1(2).scaled(-0.25)
        num = np.convolve(term.num, eta_r.num)
        term = _RationalFn(num, term.a + eta_r.a, term.b + eta_r.b)
        if total is None:
            total = term
        else:
            a = max(total.a, term.a)
            b = max(total.b, term.b)

            def lift(r):
                num = r.num
                for _ in range(a - r.a):
                    num = np.convolve(num, np.array([0.0, 1.0]))
                for _ in range(b - r.b):
                    num = np.convolve(num, np.array([-1.0, 1.0]))
                return num

            n1, n2 = lift(total), lift(term)
            num = np.zeros(max(n1.size, n2.size), dtype=np.complex128)
            num[: n1.size] += n1
            num[: n2.size] += n2
            total = _RationalFn(num, a, b)
    return total


def _theta_quadrature_value(w: "_RationalFn", delta: float, nodes: int) -> complex:
    """Integrate w(z(theta)) dx/dtheta over (delta, 2 pi - delta).

    The parametrization x(theta) = cot(theta/2) traverses the real line as
    z = e^{i theta} runs counterclockwise; panels are geometrically graded
    toward both endpoints where x blows up.
    """
    # geometric panel edges from delta up to pi, mirrored
    edges = [delta]
    while edges[-1] < np.pi:
        edges.append(min(edges[-1] * 4.0, np.pi))
    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        panels.append((lo, hi))
        panels.append((2 * np.pi - hi, 2 * np.pi - lo))
    per_panel = max(8, int(nodes) // max(len(panels), 1))
    base_t, base_w = np.polynomial.legendre.leggauss(per_panel)
    total = 0.0 + 0.0j
    for lo, hi in panels:
        theta = 0.5 * (hi - lo) * base_t + 0.5 * (hi + lo)
        wts = 0.5 * (hi - lo) * base_w
        z = np.exp(1j * theta)
        dx_dtheta = -0.5 / np.sin(theta / 2.0) ** 2
        total += np.sum(w(z) * dx_dtheta * wts)
    return complex(total)


def rhs_real_line(
    f: LaurentPolynomial,
    gammas,
    mode: str = "exact-pullback",
    numerics: Numerics = DEFAULTS,
    delta: float | None = None,
    nodes: int | None = None,
):
    """Real-line right-hand side of the Cayley-transformed trace formulas.

    exact-pullback substitutes z = (x+i)/(x-i) and returns the circle-side
    value sum_k contour(f^(k) eta_k). theta-quadrature integrates the
    stated real-line expression along x(theta) = i(e^{i theta}+1)/(e^{i theta}-1)
    on (delta, 2 pi - delta) and returns (value, gap to exact). The gap is
    re-measured at cutoffs 16 delta and 4 delta; failing to shrink toward
    the exact value raises QuadratureDivergence.
    """
    gammas = list(gammas)
    exact = sum(
        (contour_pair(derivative(f, g.k), g.eta) for g in gammas),
        start=0.0 + 0.0j,
    )
    if mode == "exact-pullback":
        return exact
    if mode != "theta-quadrature":
        raise ValueError(f"unknown mode {mode!r}")
    delta = numerics.theta_delta if delta is None else float(delta)
    nodes = numerics.theta_nodes if nodes is None else int(nodes)
    w = _real_line_integrand(f, gammas)
    if w is None:
        return 0.0 + 0.0j, abs(exact)
    values = [_theta_quadrature_value(w, d, nodes) for d in (delta * 16, delta * 4, delta)]
    gaps = [abs(v - exact) for v in values]
    floor = 1e-6 * (1.0 + abs(exact))
    if gaps[2] > 0.5 * gaps[0] and gaps[2] > floor:
        raise QuadratureDivergence(
            f"gap sequence {gaps} does not shrink as the cutoff decreases"
        )
    return values[2], gaps[2]
