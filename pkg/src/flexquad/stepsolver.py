"""Sub-step sizes from the Gram system and the resulting update direction."""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lapack

from .exceptions import DegenerateSystemError, InvalidArgumentError
from .norms import GramSystem, _assemble

DEFAULT_REL_CUTOFF = 1e-12
# equilibrated Gram eigenvalue ratio above which the one-pass solve is used
WELL_CONDITIONED = 1e-6
_ABS_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class StepResult:
    """Sub-step sizes ``a`` and the unrelaxed direction ``P^{-1} W a``.

    ``atilde_direction`` is ``Ã P^{-1} W a`` so the caller can update the
    preconditioned gradient; ``stationarity`` is the largest relative
    first-order residual over the columns of ``W``.
    """

    a: np.ndarray
    direction: np.ndarray
    truncated_rank: int
    atilde_direction: Optional[np.ndarray] = None
    stationarity: float = 0.0


def _range_basis(U, rel_cutoff):
    """Orthonormal basis of ``range(U)`` plus the map back to column coordinates.

    Householder QR followed by an SVD of the small ``R``; singular values below
    ``rel_cutoff`` times the largest are treated as exact dependencies, so the
    basis never picks up directions outside the span. Returns ``(B, Vs)`` with
    ``U @ (Vs @ c) == B @ c`` on the retained part.
    """
    qr, tau, _, info = lapack.dgeqrf(U)
    if info != 0:
        raise DegenerateSystemError(f"QR factorization failed (info={info})")
    m = U.shape[1]
    R = np.triu(qr[:m])
    Q, _, info = lapack.dorgqr(qr, tau)
    if info != 0:
        raise DegenerateSystemError(f"QR factorization failed (info={info})")
    u, sv, vt, info = lapack.dgesdd(R)
    if info != 0 or not sv[0] > _ABS_FLOOR:
        raise DegenerateSystemError("direction matrix is numerically zero")
    k = int(np.count_nonzero(sv > rel_cutoff * sv[0]))
    return Q[:, :m] @ u[:, :k], vt[:k].T / sv[:k]


def _finite(system):
    # NaN and inf propagate through a sum
    return math.isfinite(float(system.gram.sum()) + float(system.rhs.sum()))


def _eigh(G):
    evals, evecs, info = lapack.dsyevd(G)
    if info != 0:
        raise DegenerateSystemError(f"eigendecomposition of the Gram matrix failed (info={info})")
    return evals, evecs


def _truncated_eig(G, rel_cutoff):
    """Equilibrate ``G`` by its diagonal and keep eigenpairs above ``rel_cutoff * max``.

    Returns ``(scale, evals, evecs)`` with ``G ≈ S^{-1} V diag(evals) V^T S^{-1}`` on the kept part.
    """
    diag = G.diagonal()
    if diag.size == 0 or not diag.max() > _ABS_FLOOR:
        raise DegenerateSystemError("Gram matrix is numerically zero")
    if diag.min() > _ABS_FLOOR:
        scale = 1.0 / np.sqrt(diag)
    else:
        scale = np.zeros_like(diag)
        live = diag > _ABS_FLOOR
        scale[live] = 1.0 / np.sqrt(diag[live])
    evals, evecs = _eigh(G * np.outer(scale, scale))
    top = evals[-1]
    if not top > _ABS_FLOOR:
        raise DegenerateSystemError("Gram matrix is numerically zero")
    if evals[0] > rel_cutoff * top:
        return scale, evals, evecs
    keep = evals > rel_cutoff * top
    return scale, evals[keep], evecs[:, keep]


def solve_step(system, rel_cutoff=DEFAULT_REL_CUTOFF):
    """Solve ``gram a = rhs`` with an eigenvalue-truncated pseudo-inverse.

    The Gram matrix is first equilibrated by its diagonal (the minimizer only
    depends on the span of the directions), then eigenvalues below
    ``rel_cutoff`` times the largest are discarded. Returns ``(a, rank)``.
    """
    if not 0.0 < rel_cutoff < 1.0:
        raise InvalidArgumentError(f"rel_cutoff must lie in (0, 1), got {rel_cutoff}")
    G = np.asarray(system.gram, dtype=float)
    rhs = np.asarray(system.rhs, dtype=float)
    if not math.isfinite(float(G.sum()) + float(rhs.sum())):
        raise DegenerateSystemError("Gram system has non-finite entries")
    if G.shape == (1, 1) and G[0, 0] > _ABS_FLOOR:
        return rhs / G[0, 0], 1
    scale, evals, V = _truncated_eig(G, rel_cutoff)
    b = V @ ((V.T @ (scale * rhs)) / evals)
    return scale * b, V.shape[1]


def _two_pass(op, norm, U, gtilde, rel_cutoff):
    Q, Vs = _range_basis(U, rel_cutoff)
    system, AQ, MQ = _assemble(norm, op, Q, gtilde)
    if not _finite(system):
        raise DegenerateSystemError("Gram system has non-finite entries")
    scale, evals, V = _truncated_eig(system.gram, rel_cutoff)
    C = scale[:, None] * V / np.sqrt(evals)
    AT, MT = AQ @ C, MQ @ C
    # nearly the identity now, so a Cholesky solve is accurate
    gram = MT.T @ AT
    gram = 0.5 * (gram + gram.T)
    rhs = MT.T @ gtilde
    _, c, info = lapack.dposv(gram, rhs)
    if info != 0:
        c = np.linalg.solve(gram, rhs)
    b = C @ c
    return Vs @ b, V.shape[1], Q @ b, AT @ c


def flexible_step(op, norm, W, gtilde, rel_cutoff=DEFAULT_REL_CUTOFF, stationarity=True):
    """Exact norm-minimizing step over the span of ``P^{-1} W``; relaxation is left to the caller.

    The Gram system on ``U = P^{-1} W`` is equilibrated and solved directly
    when its condition number is below ``1 / WELL_CONDITIONED``. Otherwise two
    passes keep it accurate: ``U`` is replaced by an orthonormal basis of its
    range (exactly dependent columns drop out here), then the retained
    eigenvectors of that Gram matrix give a basis that is orthonormal in the
    Gram inner product, on which the system is re-formed and solved. ``a`` is
    reported in the coordinates of the columns of ``W``. Pass
    ``stationarity=False`` to skip the first-order residual check.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    m = W.shape[1]
    if not gtilde.any():
        zero = np.zeros(op.dim)
        return StepResult(np.zeros(m), zero, 0, zero, 0.0)
    U = op.precond.apply_inv(W)
    system, AU, MU = _assemble(norm, op, U, gtilde)
    if m == 1:
        a, rank = solve_step(system, rel_cutoff)
        direction, atilde_direction = U @ a, AU @ a
    else:
        if not _finite(system):
            raise DegenerateSystemError("Gram system has non-finite entries")
        scale, evals, V = _truncated_eig(system.gram, rel_cutoff)
        if evals.size == m and evals[0] > WELL_CONDITIONED * evals[-1]:
            a = scale * (V @ ((V.T @ (scale * system.rhs)) / evals))
            rank = m
            direction, atilde_direction = U @ a, AU @ a
        else:
            a, rank, direction, atilde_direction = _two_pass(op, norm, U, gtilde, rel_cutoff)
    if not stationarity:
        return StepResult(a, direction, rank, atilde_direction, 0.0)
    resid = gtilde - atilde_direction
    col_scale = np.sqrt(np.einsum("ij,ij->j", MU, MU)) * (
        math.sqrt(gtilde @ gtilde) + math.sqrt(atilde_direction @ atilde_direction))
    live = col_scale > 0
    rel = np.abs(MU[:, live].T @ resid) / col_scale[live]
    return StepResult(a, direction, rank, atilde_direction, float(rel.max()) if rel.size else 0.0)
