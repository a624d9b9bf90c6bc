import numpy as np
import pytest

from traceshift import validate
from traceshift.ensembles import (
    random_contraction,
    random_laurent,
    random_selfadjoint,
    random_unitary,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def unitary(seed, dim, tol=1e-10):
    return validate(random_unitary(np.random.default_rng(seed), dim), "unitary", tol)


def selfadjoint(seed, dim, norm=1.0, tol=1e-10):
    return validate(
        random_selfadjoint(np.random.default_rng(seed), dim, norm), "selfadjoint", tol
    )


def contraction(seed, dim, tol=1e-10):
    return validate(random_contraction(np.random.default_rng(seed), dim), "contraction", tol)


def laurent(seed, max_degree):
    return random_laurent(np.random.default_rng(seed), max_degree)
