import numpy as np
import pytest
from sklearn.base import clone

from flexquad.estimator import FlexibleQuadraticSolver
from flexquad.exceptions import InvalidArgumentError, NotPositiveDefiniteError
from flexquad.linops import generate_problem


def test_params_round_trip():
    est = FlexibleQuadraticSolver(strategy="forsythe", forsythe_s=3, omega=0.9)
    params = est.get_params()
    assert params["strategy"] == "forsythe" and params["forsythe_s"] == 3 and params["omega"] == 0.9
    other = clone(est).set_params(omega=1.2)
    assert other.omega == 1.2 and est.omega == 0.9


def test_fit_solves():
    p = generate_problem(4, 40, 30)
    est = FlexibleQuadraticSolver().fit(p.A, p.b)
    assert est.status_ == "converged"
    assert est.n_iter_ == len(est.trace_) - 1
    assert np.linalg.norm(p.A @ est.solution_ - p.b) ** 2 < 1e-6
    assert est.score(p.A, p.b) > -1e-6
    assert est.spectrum_.kappa > 1


def test_fit_with_bounds_and_options():
    p = generate_problem(4, 40, 30)
    est = FlexibleQuadraticSolver(strategy="gradient", ell=0.5, omega=1.3, preconditioner="jacobi",
                                  max_iter=50, record_bounds=True).fit(p.A, p.b, z0=np.ones(30))
    assert est.verification_.passed
    assert est.bounds_.c_omega < 1
    est = FlexibleQuadraticSolver(mu=0.5).fit(p.A, p.b)
    assert est.status_ == "converged"


def test_fit_validation():
    with pytest.raises(InvalidArgumentError):
        FlexibleQuadraticSolver(omega=2.0).fit(np.eye(2), np.ones(2))
    with pytest.raises(NotPositiveDefiniteError):
        FlexibleQuadraticSolver().fit(-np.eye(2), np.ones(2))
    with pytest.raises(InvalidArgumentError):
        FlexibleQuadraticSolver().fit(np.eye(2), np.ones(3))
    with pytest.raises(InvalidArgumentError):
        FlexibleQuadraticSolver(strategy="lbfgs").fit(np.eye(2), np.ones(2))
