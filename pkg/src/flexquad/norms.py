"""Gradient-minimization norms ``N(Ã) = sum_j c_j Ã^j`` and the step-size Gram system.

Powers run from -1 upward. Everything used inside a step goes through the
shifted polynomial ``M(λ) = λ N(λ)``, which has only nonnegative powers, so no
inverse of ``Ã`` is needed to compute step sizes.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .exceptions import InvalidArgumentError

POSITIVITY_GRID = 1000


@dataclass(frozen=True)
class NormSpec:
    """Laurent coefficients ``{power: coefficient}`` with lowest power >= -1.

    Use :meth:`from_ell` for the ``Ã^{2ℓ-1}`` family (ℓ = 0 is the ``Ã^{-1}``
    norm, ℓ = 1/2 the Euclidean norm) and :meth:`gdwgm` for
    ``(1-μ) Ã^{-1} + 2μ I``.
    """

    coeffs: tuple
    ell: Optional[float] = None

    def __post_init__(self):
        items = self.coeffs.items() if isinstance(self.coeffs, dict) else self.coeffs
        cleaned = {}
        for power, c in items:
            power, c = int(power), float(c)
            if not np.isfinite(c):
                raise InvalidArgumentError(f"non-finite coefficient for power {power}")
            if c != 0.0:
                cleaned[power] = cleaned.get(power, 0.0) + c
        cleaned = {p: c for p, c in cleaned.items() if c != 0.0}
        if not cleaned:
            raise InvalidArgumentError("norm has no nonzero coefficients")
        if min(cleaned) < -1:
            raise InvalidArgumentError(f"lowest power must be >= -1, got {min(cleaned)}")
        object.__setattr__(self, "coeffs", tuple(sorted(cleaned.items())))
        if self.ell is not None:
            object.__setattr__(self, "ell", float(self.ell))

    @classmethod
    def from_ell(cls, ell):
        two_ell = 2.0 * float(ell)
        if two_ell < 0 or two_ell != round(two_ell):
            raise InvalidArgumentError(f"ell must be a nonnegative multiple of 1/2, got {ell}")
        return cls(((int(round(two_ell)) - 1, 1.0),), ell=float(ell))

    @classmethod
    def gdwgm(cls, mu):
        mu = float(mu)
        if not 0.0 <= mu <= 1.0:
            raise InvalidArgumentError(f"mu must lie in [0, 1], got {mu}")
        norm = cls(((-1, 1.0 - mu), (0, 2.0 * mu)))
        if mu == 0.0:
            return cls(norm.coeffs, ell=0.0)
        return norm

    @cached_property
    def coeff_map(self):
        return dict(self.coeffs)

    @property
    def min_power(self):
        return self.coeffs[0][0]

    @property
    def max_power(self):
        return self.coeffs[-1][0]

    @property
    def pure_ell(self):
        """ℓ when the norm is a single unit power ``Ã^{2ℓ-1}``, else None."""
        if len(self.coeffs) == 1 and self.coeffs[0][1] == 1.0:
            return (self.coeffs[0][0] + 1) / 2.0
        return None

    def evaluate(self, lam):
        lam = np.asarray(lam, dtype=float)
        return sum(c * lam**p for p, c in self.coeffs)

    def check_positive(self, spectrum, points=POSITIVITY_GRID):
        """Raise unless ``sum_j c_j λ^j > 0`` on a grid over the spectral interval."""
        grid = np.linspace(spectrum.lambda_min, spectrum.lambda_max, points)
        values = self.evaluate(grid)
        if not np.all(values > 0):
            bad = grid[np.argmin(values)]
            raise InvalidArgumentError(f"norm weight is not positive on the spectrum (at λ = {bad:.6g})")

    def to_json(self):
        if self.ell is not None and self.pure_ell == self.ell:
            return {"ell": self.ell}
        return {"coeffs": {str(p): c for p, c in self.coeffs}}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InvalidArgumentError(f"norm must be a JSON object, got {obj!r}")
        if "ell" in obj:
            return cls.from_ell(obj["ell"])
        if "mu" in obj:
            return cls.gdwgm(obj["mu"])
        if "coeffs" in obj:
            try:
                return cls(tuple((int(p), float(c)) for p, c in obj["coeffs"].items()))
            except (AttributeError, TypeError, ValueError) as exc:
                raise InvalidArgumentError(f"bad norm coefficients: {exc}") from None
        raise InvalidArgumentError(f"norm object needs 'ell', 'mu' or 'coeffs': {obj!r}")


@dataclass(frozen=True)
class GramSystem:
    gram: np.ndarray
    rhs: np.ndarray


def shifted_poly_apply(norm, op, v):
    """``M(Ã) v`` with ``M(λ) = λ N(λ) = sum_j c_j λ^{j+1}``; ``v`` may be a matrix of columns."""
    if norm.coeffs == ((-1, 1.0),):
        return v
    coeffs = norm.coeff_map
    out = coeffs.get(-1, 0.0) * v
    cur = v
    for power in range(1, norm.max_power + 2):
        cur = op.matvec(cur)
        c = coeffs.get(power - 1, 0.0)
        if c != 0.0:
            out = out + c * cur
    return out


def weighted_norm_sq(norm, op, v):
    """``v^T N(Ã) v``; the ``Ã^{-1}`` term uses the operator's dense Cholesky factor."""
    coeffs = norm.coeff_map
    total = 0.0
    if -1 in coeffs:
        y = op.inv_sqrt_apply(v)
        total += coeffs[-1] * float(y @ y)
    cur = v
    half = norm.max_power // 2
    # v^T Ã^{2i} v = ||Ã^i v||^2 and v^T Ã^{2i+1} v = (Ã^i v)^T Ã (Ã^i v)
    for i in range(half + 1):
        if i > 0:
            cur = op.matvec(cur)
        c_even = coeffs.get(2 * i, 0.0)
        if c_even != 0.0:
            total += c_even * float(cur @ cur)
        c_odd = coeffs.get(2 * i + 1, 0.0)
        if c_odd != 0.0:
            total += c_odd * float(cur @ op.matvec(cur))
    return max(total, 0.0)


def _assemble(norm, op, U, gtilde):
    AU = op.matvec(U)
    MU = shifted_poly_apply(norm, op, U)
    gram = MU.T @ AU
    gram = 0.5 * (gram + gram.T)
    return GramSystem(gram, MU.T @ gtilde), AU, MU


def assemble_gram(norm, op, W, gtilde):
    """Gram matrix ``U^T Ã N(Ã) Ã U`` and rhs ``U^T N(Ã) Ã g̃`` with ``U = P^{-1} W``."""
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    gtilde = np.asarray(gtilde, dtype=float)
    if W.shape[0] != op.dim or gtilde.shape != (op.dim,):
        raise InvalidArgumentError(
            f"direction matrix {W.shape} / gradient {gtilde.shape} do not match dimension {op.dim}"
        )
    return _assemble(norm, op, op.precond.apply_inv(W), gtilde)[0]
