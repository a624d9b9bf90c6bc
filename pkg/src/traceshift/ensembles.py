"""Deterministic random instances for the verification suites.

All draws go through ``numpy.random.default_rng(seed)`` so reports are
reproducible bit-for-bit from (seed, config). Spectra are resampled until
pairwise separation clears the configured floor; generic draws pass on
the first attempt.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULTS, Numerics
from .errors import SeparationUnreachable
from .linops import operator_norm, validate
from .cayley import validate_dissipative
from .symbols import LaurentPolynomial

__all__ = [
    "gen_instance",
    "build_instance",
    "random_unitary",
    "random_selfadjoint",
    "random_contraction",
    "random_dissipative",
    "random_laurent",
]

_MAX_RESAMPLES = 100


def _ginibre(rng, dim):
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


def _separation(values) -> float:
    vals = np.asarray(values)
    if len(vals) < 2:
        return np.inf
    diffs = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(diffs, np.inf)
    return float(diffs.min())


def _resample(draw, spectrum_of, separation_min):
    for _ in range(_MAX_RESAMPLES):
        m = draw()
        if _separation(spectrum_of(m)) >= separation_min:
            return m
    raise SeparationUnreachable(
        f"no draw reached spectral separation {separation_min} in {_MAX_RESAMPLES} tries"
    )


def random_unitary(rng, dim, numerics: Numerics = DEFAULTS):
    """Haar-style unitary: QR of a complex Gaussian with phase-fixed R."""

    def draw():
        q, r = np.linalg.qr(_ginibre(rng, dim))
        return q * (np.diag(r) / np.abs(np.diag(r)))

    return _resample(draw, np.linalg.eigvals, numerics.separation_min)


def random_selfadjoint(rng, dim, norm=None, numerics: Numerics = DEFAULTS):
    """GUE-style Hermitian matrix scaled to the requested operator norm."""
    target = numerics.generator_norm if norm is None else float(norm)

    def draw():
        g = _ginibre(rng, dim)
        h = (g + g.conj().T) / 2
        scale = operator_norm(h)
        return h * (target / scale) if scale > 0 else h

    return _resample(draw, np.linalg.eigvalsh, numerics.separation_min)


def random_contraction(rng, dim, numerics: Numerics = DEFAULTS):
    """Gaussian draw scaled to operator norm 1 - contraction_margin.

    Keeping the norm strictly inside the disk keeps the inverse Cayley
    transform well conditioned.
    """

    def draw():
        g = _ginibre(rng, dim)
        return g * ((1.0 - numerics.contraction_margin) / operator_norm(g))

    return _resample(draw, np.linalg.eigvals, numerics.separation_min)


def random_dissipative(rng, dim, numerics: Numerics = DEFAULTS):
    """S - iR with S Hermitian and R positive semidefinite, by construction."""

    def draw():
        g = _ginibre(rng, dim)
        s = (g + g.conj().T) / 2
        c = _ginibre(rng, dim)
        r = c @ c.conj().T / dim
        return s - 1j * r

    return _resample(draw, np.linalg.eigvals, numerics.separation_min)


def random_laurent(rng, max_degree, zero_low_positive=0):
    """Random trig polynomial with unit-box coefficients.

    ``zero_low_positive`` clears hat(f)(k) for k = 1..zero_low_positive,
    matching the constrained admissible classes.
    """
    coeffs = {}
    for k in range(-max_degree, max_degree + 1):
        c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        coeffs[k] = c
    for k in range(1, zero_low_positive + 1):
        coeffs.pop(k, None)
    return LaurentPolynomial(coeffs)


def gen_instance(kind: str, dim: int, seed: int, params=None, numerics: Numerics = DEFAULTS):
    """Draw a named instance kind; returns typed operators.

    Kinds: unitary, selfadjoint-generator, contraction, dissipative,
    selfadjoint-pair.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "unitary":
        return validate(random_unitary(rng, dim, numerics), "unitary", 1e-10)
    if kind == "selfadjoint-generator":
        norm = params.get("norm", numerics.generator_norm)
        return validate(random_selfadjoint(rng, dim, norm, numerics), "selfadjoint", 1e-10)
    if kind == "contraction":
        return validate(random_contraction(rng, dim, numerics), "contraction", 1e-10)
    if kind == "dissipative":
        return validate_dissipative(random_dissipative(rng, dim, numerics), 1e-10)
    if kind == "selfadjoint-pair":
        h0 = random_selfadjoint(rng, dim, params.get("norm", 1.0), numerics)
        v = random_selfadjoint(rng, dim, params.get("perturbation_norm", 0.5), numerics)
        return (
            validate(h0, "selfadjoint", 1e-10),
            validate(v, "selfadjoint", 1e-10),
        )
    raise ValueError(f"unknown instance kind {kind!r}")


def build_instance(theorem: str, dim: int, seed: int, numerics: Numerics = DEFAULTS, params=None):
    """Named operator bundle for one verification run.

    The generator seed is offset per role so instances with the same seed
    share nothing across roles.
    """
    params = dict(params or {})
    base = {"theorem": theorem, "dim": dim, "seed": seed}
    if theorem in ("unitary-mult", "lin-unitary"):
        base["u0"] = gen_instance("unitary", dim, seed, params, numerics)
        base["a"] = gen_instance(
            "selfadjoint-generator", dim, seed + 1, params, numerics
        )
    elif theorem in ("contraction-mult", "helton"):
        base["t0"] = gen_instance("contraction", dim, seed, params, numerics)
        base["b"] = gen_instance(
            "selfadjoint-generator", dim, seed + 1, params, numerics
        )
    elif theorem == "dissipative":
        base["l0"] = gen_instance("dissipative", dim, seed, params, numerics)
        base["b"] = gen_instance(
            "selfadjoint-generator", dim, seed + 1, {"norm": params.get("norm", 1.0)}, numerics
        )
    elif theorem == "selfadjoint-resolvent":
        h0, v = gen_instance("selfadjoint-pair", dim, seed, params, numerics)
        base["h0"] = h0
        base["v"] = v
    else:
        raise ValueError(f"unknown theorem {theorem!r}")
    return base
