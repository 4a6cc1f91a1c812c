"""Input validation helpers shared by the solver modules and the estimator."""
import numpy as np

from .exceptions import InvalidArgumentError, NotPositiveDefiniteError

SYMMETRY_RTOL = 1e-12


def as_float_vector(v, n=None, name="vector"):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InvalidArgumentError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def as_square_matrix(M, n=None, name="matrix"):
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InvalidArgumentError(f"{name} has size {arr.shape[0]}, expected {n}")
    if arr.shape[0] == 0:
        raise InvalidArgumentError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def symmetrize(A, rtol=SYMMETRY_RTOL):
    """Return (A + A^T)/2, rejecting matrices that are asymmetric beyond roundoff."""
    scale = np.max(np.abs(A))
    asym = np.max(np.abs(A - A.T))
    if asym > rtol * scale:
        raise InvalidArgumentError(
            f"matrix is not symmetric (max |A - A^T| = {asym:.3e}, scale {scale:.3e})"
        )
    return 0.5 * (A + A.T)


def check_spd(A, name="matrix"):
    """Validate, symmetrize and Cholesky-check ``A``; returns the symmetrized copy."""
    A = symmetrize(as_square_matrix(A, name=name))
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"{name} is not positive definite") from None
    return A


def check_omega(omega):
    omega = float(omega)
    if not 0.0 < omega < 2.0:
        raise InvalidArgumentError(f"relaxation omega must lie in the open interval (0, 2), got {omega}")
    return omega
