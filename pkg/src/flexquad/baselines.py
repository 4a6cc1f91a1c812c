"""Classical reference solvers, written independently of the multi-direction step code.

Textbook CG and CR serve as cross-implementation oracles for the framework's
``[g, s]`` strategy; NAGM is a constant-step baseline that does not minimize
any gradient norm.
"""
import numpy as np

from ._validation import as_float_vector
from .linops import PreconditionedOperator
from .norms import NormSpec, weighted_norm_sq
from .runner import RunResult, TraceRecord


class _Tracer:
    def __init__(self, problem, norm, keep_iterates):
        self.problem = problem
        self.op = PreconditionedOperator(problem)
        self.norm = norm or NormSpec.from_ell(0)
        self.z_star = problem.minimizer
        self.records = []
        self.iterates = [] if keep_iterates else None

    def record(self, z, g):
        wn = weighted_norm_sq(self.norm, self.op, g)
        rec = TraceRecord(len(self.records), 0.5 * float(g @ (z - self.z_star)), float(g @ g), wn)
        if self.records:
            prev = self.records[-1].weighted_gnorm_sq
            rec.contraction_ratio = wn / prev if prev > 0 else 0.0
        self.records.append(rec)
        if self.iterates is not None:
            self.iterates.append(z.copy())
        return rec.grad_norm_sq

    def result(self, status, z, config=None):
        return RunResult(self.records, status, z, config, None, self.iterates)


def _start(problem, z0):
    n = problem.dim
    return np.zeros(n) if z0 is None else as_float_vector(z0, n, name="z0").copy()


def run_textbook_cg(problem, tol=1e-6, max_iter=1000, z0=None, restart=None,
                    norm=None, keep_iterates=False, config=None):
    """Fletcher-Reeves form of CG on ``A z = b``; ``restart=s`` resets the direction every s steps."""
    A, b = problem.A, problem.b
    z = _start(problem, z0)
    tr = _Tracer(problem, norm, keep_iterates)
    r = b - A @ z
    d = r.copy()
    rr = r @ r
    status = "max_iter"
    for k in range(max_iter + 1):
        if tr.record(z, -r) < tol:
            status = "converged"
            break
        if k == max_iter:
            break
        if restart and k % restart == 0:
            d = r.copy()
        Ad = A @ d
        dAd = d @ Ad
        if dAd <= 0:
            status = "degenerate"
            break
        alpha = rr / dAd
        z = z + alpha * d
        r = b - A @ z if restart and (k + 1) % restart == 0 else r - alpha * Ad
        rr_new = r @ r
        d = r + (rr_new / rr) * d
        rr = rr_new
    return tr.result(status, z, config)


def run_textbook_cr(problem, tol=1e-6, max_iter=1000, z0=None, norm=None,
                    keep_iterates=False, config=None):
    """Conjugate residuals: minimizes ``||b - A z||_2`` over the growing Krylov space."""
    A, b = problem.A, problem.b
    z = _start(problem, z0)
    tr = _Tracer(problem, norm or NormSpec.from_ell(0.5), keep_iterates)
    r = b - A @ z
    p = r.copy()
    Ar = A @ r
    Ap = Ar.copy()
    rAr = r @ Ar
    status = "max_iter"
    for k in range(max_iter + 1):
        if tr.record(z, -r) < tol:
            status = "converged"
            break
        if k == max_iter:
            break
        ApAp = Ap @ Ap
        if ApAp <= 0 or rAr <= 0:
            status = "degenerate"
            break
        alpha = rAr / ApAp
        z = z + alpha * p
        r = r - alpha * Ap
        Ar = A @ r
        rAr_new = r @ Ar
        beta = rAr_new / rAr
        rAr = rAr_new
        p = r + beta * p
        Ap = Ar + beta * Ap
    return tr.result(status, z, config)


def run_nagm(problem, tol=1e-6, max_iter=1000, z0=None, spectrum=None, norm=None,
             keep_iterates=False, config=None):
    """Nesterov's method for quadratics in single-sequence form with constant ``1/L`` and ``β``."""
    A, b = problem.A, problem.b
    if spectrum is None:
        spectrum = PreconditionedOperator(problem).spectrum
    L = spectrum.lambda_max
    sq_max, sq_min = np.sqrt(spectrum.lambda_max), np.sqrt(spectrum.lambda_min)
    beta = (sq_max - sq_min) / (sq_max + sq_min)
    z = _start(problem, z0)
    tr = _Tracer(problem, norm, keep_iterates)
    z_prev, g_prev = None, None
    status = "max_iter"
    for k in range(max_iter + 1):
        g = A @ z - b
        if not np.all(np.isfinite(g)):
            status = "failed"
            break
        if tr.record(z, g) < tol:
            status = "converged"
            break
        if k == max_iter:
            break
        z_next = z - g / L
        if z_prev is not None:
            z_next = z_next + beta * (z - z_prev) + (beta / L) * (g_prev - g)
        z_prev, g_prev, z = z, g, z_next
    return tr.result(status, z, config)
