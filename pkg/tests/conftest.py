import sys

import numpy as np
import pytest

from monopersuasion.objective import ObjectiveFn
from monopersuasion.priors import DiscretePrior, PiecewiseUniformPrior, uniform_prior

# even quartic: V'' = (m - 0.3)(0.7 - m), affine term chosen so V'(0.5) = 0
EVEN_AFFINE = 13.0 / 600.0
M_L_EXACT = (1.0 - np.sqrt(0.48)) / 2.0
M_R_EXACT = (1.0 + np.sqrt(0.48)) / 2.0


def smoothstep_fn() -> ObjectiveFn:
    return ObjectiveFn.polynomial([0.0, 0.0, 3.0, -2.0])


def even_quartic_fn(extra_a: float = 0.0, extra_b: float = 0.0) -> ObjectiveFn:
    return ObjectiveFn.m_family(0.3, 0.7, affine=[EVEN_AFFINE + extra_a, extra_b])


def quartic_value(m):
    """Closed form of the even quartic, independent of the polynomial machinery."""
    m = np.asarray(m, dtype=float)
    return -m ** 4 / 12 + m ** 3 / 6 - 0.105 * m ** 2 + EVEN_AFFINE * m


def atoms_close(g, expected, tol=1e-12) -> bool:
    got = np.asarray(g.atoms, dtype=float).reshape(-1, 2)
    want = np.asarray(expected, dtype=float).reshape(-1, 2)
    return got.shape == want.shape and bool(np.all(np.abs(got - want) <= tol))


def polarized_prior() -> PiecewiseUniformPrior:
    return PiecewiseUniformPrior([[0.0, 0.1, 0.45], [0.1, 0.9, 0.10], [0.9, 1.0, 0.45]])


def ultra_prior() -> PiecewiseUniformPrior:
    return PiecewiseUniformPrior([[0.0, 0.01, 0.495], [0.01, 0.99, 0.01], [0.99, 1.0, 0.495]])


def pooled_left_prior() -> PiecewiseUniformPrior:
    # mass concentrated in the left concave region of m_family(0.4, 0.9)
    return PiecewiseUniformPrior([[0.0, 0.1, 0.1], [0.1, 0.2, 0.8], [0.2, 1.0, 0.1]])


@pytest.fixture
def smoothstep():
    return smoothstep_fn()


@pytest.fixture
def even_quartic():
    return even_quartic_fn()


@pytest.fixture
def polarized():
    return polarized_prior()


@pytest.fixture
def ultra():
    return ultra_prior()


@pytest.fixture
def uniform():
    return uniform_prior()


@pytest.fixture
def two_state():
    return DiscretePrior([0.0, 1.0], [0.5, 0.5])


@pytest.fixture
def three_state():
    return DiscretePrior([0.0, 0.5, 1.0], [0.25, 0.25, 0.5])


@pytest.fixture
def eps_prior():
    return DiscretePrior([0.0, 0.01, 1.0], [1 / 6, 1 / 3, 1 / 2])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance")
    for i in sorted(results):
        terminalreporter.write_line(results[i].line())
