"""Quadratic problem instances, symmetric preconditioners and the preconditioned operator.

The quadratic is ``f(z) = 0.5 z^T A z - z^T b`` with ``A`` symmetric positive
definite. A preconditioner is stored through ``P^{-1}``; the preconditioned
operator is ``Ã = P^{-1} A P^{-T}`` acting on ``x = P^T z``.

Randomness everywhere goes through :func:`numpy.random.default_rng` (PCG64)
seeded with an explicit integer.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg as sla

from ._validation import as_float_vector, as_square_matrix, check_spd
from .exceptions import InvalidArgumentError, UnsupportedSizeError

DEFAULT_DENSE_CAP = 2000


def _frozen(arr):
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """SPD matrix ``A``, right-hand side ``b`` and optionally the minimizer ``A^{-1} b``."""

    A: np.ndarray
    b: np.ndarray
    known_solution: Optional[np.ndarray] = None

    def __post_init__(self):
        A = check_spd(self.A, name="A")
        b = as_float_vector(self.b, A.shape[0], name="b")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        if self.known_solution is not None:
            zs = as_float_vector(self.known_solution, A.shape[0], name="known_solution")
            resid = np.linalg.norm(A @ zs - b)
            if resid > 1e-10 * (1.0 + np.linalg.norm(b)):
                raise InvalidArgumentError(f"known_solution does not solve A z = b (residual {resid:.3e})")
            object.__setattr__(self, "known_solution", _frozen(zs))

    @property
    def dim(self):
        return self.A.shape[0]

    def objective(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * z @ (self.A @ z) - z @ self.b

    @cached_property
    def minimizer(self):
        """``known_solution`` when present, else a dense Cholesky solve."""
        if self.known_solution is not None:
            return self.known_solution
        return _frozen(sla.cho_solve(sla.cho_factor(self.A), self.b))

    @cached_property
    def optimal_value(self):
        return float(self.objective(self.minimizer))


@dataclass(frozen=True, eq=False)
class Preconditioner:
    """Representation of ``P^{-1}``: ``"identity"``, ``"diagonal"`` (entries of P^{-1}) or ``"dense"``."""

    kind: str = "identity"
    data: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "identity":
            if self.data is not None:
                raise InvalidArgumentError("identity preconditioner takes no data")
        elif self.kind == "diagonal":
            d = as_float_vector(self.data, name="diagonal preconditioner")
            if np.any(d == 0.0):
                raise InvalidArgumentError("diagonal preconditioner has a zero entry")
            object.__setattr__(self, "data", _frozen(d))
        elif self.kind == "dense":
            M = as_square_matrix(self.data, name="dense preconditioner")
            if np.linalg.matrix_rank(M) < M.shape[0]:
                raise InvalidArgumentError("dense preconditioner is singular")
            object.__setattr__(self, "data", _frozen(M))
        else:
            raise InvalidArgumentError(f"unknown preconditioner kind {self.kind!r}")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def diagonal(cls, d):
        return cls("diagonal", d)

    @classmethod
    def dense_inverse(cls, M):
        return cls("dense", M)

    @classmethod
    def jacobi(cls, problem):
        """P = diag(A_ii), so P^{-1} has entries 1/A_ii."""
        return cls.diagonal(1.0 / np.diag(problem.A))

    @classmethod
    def jacobi_sqrt(cls, problem):
        """Symmetric Jacobi split P = diag(sqrt(A_ii)); gives unit diagonal in Ã."""
        return cls.diagonal(1.0 / np.sqrt(np.diag(problem.A)))

    @cached_property
    def _lu(self):
        return sla.lu_factor(self.data)

    def apply_inv(self, v, transposed=False):
        if self.kind == "identity":
            return v
        if self.kind == "diagonal":
            return self.data * v if v.ndim == 1 else self.data[:, None] * v
        return (self.data.T if transposed else self.data) @ v

    def apply_metric(self, v):
        """``P P^T v``, the z-space image of an x-space displacement."""
        if self.kind == "identity":
            return v
        if self.kind == "diagonal":
            d2 = self.data**2
            return v / d2 if v.ndim == 1 else v / d2[:, None]
        y = sla.lu_solve(self._lu, v, trans=1)
        return sla.lu_solve(self._lu, y)

    def apply_metric_inv(self, v):
        """``P^{-T} P^{-1} v``."""
        return self.apply_inv(self.apply_inv(v), transposed=True)


@dataclass(frozen=True)
class SpectrumInfo:
    lambda_max: float
    lambda_min: float

    def __post_init__(self):
        if not self.lambda_max >= self.lambda_min > 0:
            raise InvalidArgumentError(
                f"invalid spectrum bounds ({self.lambda_min}, {self.lambda_max})"
            )

    @property
    def kappa(self):
        return self.lambda_max / self.lambda_min


class PreconditionedOperator:
    """``Ã = P^{-1} A P^{-T}`` applied matrix-free, with lazily cached dense factors.

    Dense assembly (eigenvalues, ``Ã^{-1}`` solves) is refused above ``dense_cap``.
    """

    def __init__(self, problem, precond=None, dense_cap=DEFAULT_DENSE_CAP):
        self.problem = problem
        self.precond = Preconditioner.identity() if precond is None else precond
        self.dense_cap = dense_cap
        if self.precond.data is not None and self.precond.data.shape[0] != problem.dim:
            raise InvalidArgumentError(
                f"preconditioner size {self.precond.data.shape[0]} does not match problem size {problem.dim}"
            )

    @property
    def dim(self):
        return self.problem.dim

    def matvec(self, v):
        P = self.precond
        return P.apply_inv(self.problem.A @ P.apply_inv(v, transposed=True))

    def dense(self):
        if self.dim > self.dense_cap:
            raise UnsupportedSizeError(
                f"dense assembly of a {self.dim}x{self.dim} operator exceeds the cap {self.dense_cap}"
            )
        return self._dense

    @cached_property
    def _dense(self):
        P = self.precond
        X = P.apply_inv(self.problem.A)
        At = P.apply_inv(X.T)
        return 0.5 * (At + At.T)

    @cached_property
    def _cho(self):
        return sla.cho_factor(self.dense(), lower=True)

    def solve(self, v):
        """``Ã^{-1} v`` by a cached dense Cholesky factorization."""
        return sla.cho_solve(self._cho, v, check_finite=False)

    @cached_property
    def _chol_inv(self):
        L = np.tril(self._cho[0])
        return sla.solve_triangular(L, np.eye(self.dim), lower=True, check_finite=False)

    def inv_sqrt_apply(self, v):
        """``L^{-1} v`` with ``Ã = L L^T``, so ``||L^{-1} v||^2 = v^T Ã^{-1} v``."""
        return self._chol_inv @ v

    @cached_property
    def spectrum(self):
        w = np.linalg.eigvalsh(self.dense())
        return SpectrumInfo(lambda_max=float(w[-1]), lambda_min=float(w[0]))


def gradient(problem, z):
    z = as_float_vector(z, problem.dim, name="z")
    return problem.A @ z - problem.b


def apply_precond_inv(precond, v, transposed=False):
    v = as_float_vector(v, name="v")
    if precond.data is not None and precond.data.shape[0] != v.shape[0]:
        raise InvalidArgumentError(f"vector length {v.shape[0]} does not match preconditioner size")
    return precond.apply_inv(v, transposed=transposed)


def apply_atilde(problem, precond, v):
    v = as_float_vector(v, problem.dim, name="v")
    return PreconditionedOperator(problem, precond).matvec(v)


def extremal_eigenvalues(problem, precond=None, dense_cap=DEFAULT_DENSE_CAP):
    return PreconditionedOperator(problem, precond, dense_cap=dense_cap).spectrum


def generate_problem(seed, rows, cols):
    """Random ``A = B^T B`` with ``B`` uniform on [0, 1)^{rows x cols}; ``b = A x*``."""
    rows, cols = int(rows), int(cols)
    if cols < 1 or rows < cols:
        raise InvalidArgumentError(f"need rows >= cols >= 1, got rows={rows}, cols={cols}")
    rng = np.random.default_rng(seed)
    B = rng.random((rows, cols))
    x_star = rng.random(cols)
    A = B.T @ B
    A = 0.5 * (A + A.T)
    return ProblemInstance(A, A @ x_star, known_solution=x_star)


def initial_point(seed, n):
    """Shared starting vector for all runs on one problem; uniform on [0, 1)^n."""
    return np.random.default_rng([int(seed), 1]).random(int(n))


def spd_with_spectrum(seed, eigenvalues):
    """SPD test matrix ``Q diag(eigenvalues) Q^T`` with Haar-random orthogonal ``Q``."""
    eigenvalues = as_float_vector(eigenvalues, name="eigenvalues")
    n = eigenvalues.shape[0]
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    A = (Q * eigenvalues) @ Q.T
    A = 0.5 * (A + A.T)
    x_star = rng.standard_normal(n)
    return ProblemInstance(A, A @ x_star, known_solution=x_star)
