"""scikit-learn style front end: ``FlexibleQuadraticSolver().fit(A, b).solution_``."""
import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_float_vector
from .directions import StrategySpec
from .exceptions import InvalidArgumentError
from .linops import PreconditionedOperator, ProblemInstance
from .norms import NormSpec
from .runner import RunConfig, resolve_preconditioner, run_flexible, verify_run
from .stepsolver import DEFAULT_REL_CUTOFF


class FlexibleQuadraticSolver(BaseEstimator):
    """Minimize ``0.5 z^T A z - b^T z`` with the multi-direction exact-step scheme.

    Parameters mirror :class:`RunConfig`. ``mu`` (when not None) selects the
    ``(1-μ) Ã^{-1} + 2μ I`` norm and takes precedence over ``ell``.

    Attributes set by ``fit``: ``solution_``, ``n_iter_``, ``status_``,
    ``trace_`` (list of TraceRecord), ``spectrum_``, ``bounds_`` and, with
    ``record_bounds=True``, ``verification_``.
    """

    def __init__(self, strategy="grad-prev-step", ell=0.0, mu=None, omega=1.0,
                 preconditioner="identity", tol=1e-6, max_iter=1000, forsythe_s=2,
                 random_state=0, rel_cutoff=DEFAULT_REL_CUTOFF, record_bounds=False):
        self.strategy = strategy
        self.ell = ell
        self.mu = mu
        self.omega = omega
        self.preconditioner = preconditioner
        self.tol = tol
        self.max_iter = max_iter
        self.forsythe_s = forsythe_s
        self.random_state = random_state
        self.rel_cutoff = rel_cutoff
        self.record_bounds = record_bounds

    def _run_config(self):
        strategy = self.strategy
        if not isinstance(strategy, StrategySpec):
            strategy = StrategySpec(strategy, s=self.forsythe_s)
        norm = NormSpec.gdwgm(self.mu) if self.mu is not None else NormSpec.from_ell(self.ell)
        seed = self.random_state
        if seed is None or isinstance(seed, np.random.Generator):
            raise InvalidArgumentError("random_state must be an integer seed")
        return RunConfig(strategy=strategy, norm=norm, precond=self.preconditioner, omega=self.omega,
                         tol_grad_sq=self.tol, max_iter=self.max_iter, seed=int(seed),
                         record_bounds=self.record_bounds, rel_cutoff=self.rel_cutoff)

    def fit(self, A, b, z0=None):
        config = self._run_config()
        problem = ProblemInstance(A, b)
        op = PreconditionedOperator(problem, resolve_preconditioner(config.precond, problem))
        if z0 is not None:
            z0 = as_float_vector(z0, problem.dim, name="z0")
        result = run_flexible(problem, config, z0=z0, op=op)
        self.solution_ = result.z
        self.n_iter_ = result.iterations
        self.status_ = result.status
        self.trace_ = result.records
        self.spectrum_ = op.spectrum
        self.bounds_ = result.bounds
        if result.bounds is not None:
            self.verification_ = verify_run(result)
        return self

    def score(self, A, b):
        """Negative squared gradient norm at the fitted solution (larger is better)."""
        r = np.asarray(A, dtype=float) @ self.solution_ - np.asarray(b, dtype=float)
        return -float(r @ r)
