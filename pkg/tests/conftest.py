import numpy as np
import pytest

from flexquad.linops import PreconditionedOperator, generate_problem, spd_with_spectrum


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_problem():
    return generate_problem(7, 12, 10)


def uniform_spectrum_problem(seed, n, kappa=100.0):
    """Eigenvalues uniform in [1, κ] with both ends pinned, so κ is exact."""
    r = np.random.default_rng(seed)
    return spd_with_spectrum(seed, np.concatenate([[1.0, kappa], r.uniform(1.0, kappa, n - 2)]))


@pytest.fixture
def conditioned_problem():
    return uniform_spectrum_problem(3, 20)


def rel_err(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return float(np.linalg.norm(x - y) / max(np.linalg.norm(y), 1e-300))


def make_op(problem, precond=None):
    return PreconditionedOperator(problem, precond)
