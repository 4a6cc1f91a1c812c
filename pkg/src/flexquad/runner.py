"""The relaxed, preconditioned multi-direction iteration and its convergence checks."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import as_float_vector, check_omega
from .directions import StrategySpec, StrategyState, make_directions, update_state
from .exceptions import DegenerateSystemError, InvalidArgumentError
from .linops import Preconditioner, PreconditionedOperator
from .norms import NormSpec, shifted_poly_apply, weighted_norm_sq
from .stepsolver import DEFAULT_REL_CUTOFF, flexible_step

BOUND_SLACK = 1e-10
METHODS = ("flexible", "nagm", "textbook-cg", "textbook-cr")
PRECONDITIONERS = ("identity", "jacobi", "jacobi-sqrt")


def resolve_preconditioner(precond, problem):
    if isinstance(precond, Preconditioner):
        return precond
    if precond in (None, "identity"):
        return Preconditioner.identity()
    if precond == "jacobi":
        return Preconditioner.jacobi(problem)
    if precond == "jacobi-sqrt":
        return Preconditioner.jacobi_sqrt(problem)
    raise InvalidArgumentError(f"unknown preconditioner {precond!r}; expected one of {PRECONDITIONERS}")


@dataclass(frozen=True)
class RunConfig:
    strategy: StrategySpec = field(default_factory=StrategySpec)
    norm: NormSpec = field(default_factory=lambda: NormSpec.from_ell(0))
    precond: object = "identity"
    omega: float = 1.0
    tol_grad_sq: float = 1e-6
    max_iter: int = 1000
    seed: int = 0
    record_bounds: bool = False
    rel_cutoff: float = DEFAULT_REL_CUTOFF
    method: str = "flexible"

    def __post_init__(self):
        object.__setattr__(self, "omega", check_omega(self.omega))
        if not self.tol_grad_sq > 0:
            raise InvalidArgumentError(f"tol_grad_sq must be positive, got {self.tol_grad_sq}")
        if int(self.max_iter) < 1:
            raise InvalidArgumentError(f"max_iter must be positive, got {self.max_iter}")
        object.__setattr__(self, "max_iter", int(self.max_iter))
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not isinstance(self.precond, Preconditioner) and self.precond not in PRECONDITIONERS:
            raise InvalidArgumentError(f"unknown preconditioner {self.precond!r}")
        if not 0.0 < self.rel_cutoff < 1.0:
            raise InvalidArgumentError(f"rel_cutoff must lie in (0, 1), got {self.rel_cutoff}")

    def to_json(self):
        precond = self.precond if isinstance(self.precond, str) else self.precond.kind
        return {
            "method": self.method,
            "strategy": self.strategy.to_json(),
            "norm": self.norm.to_json(),
            "precond": precond,
            "omega": self.omega,
            "tol_grad_sq": self.tol_grad_sq,
            "max_iter": self.max_iter,
            "seed": self.seed,
            "record_bounds": self.record_bounds,
            "rel_cutoff": self.rel_cutoff,
        }


@dataclass
class TraceRecord:
    k: int
    f_gap: float
    grad_norm_sq: float
    weighted_gnorm_sq: float
    m_k: Optional[int] = None
    a_k: Optional[np.ndarray] = None
    contraction_ratio: Optional[float] = None
    truncated_rank: Optional[int] = None
    stationarity: Optional[float] = None
    mgd_bound: Optional[float] = None
    step_gnorm_sq: Optional[float] = None
    error_norm_sq: Optional[float] = None


@dataclass
class BoundReport:
    c_omega: float
    corollary_rate: float
    K_bound: Optional[float]
    kappa_tilde: float

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class RunResult:
    records: list
    status: str
    z: np.ndarray
    config: Optional[RunConfig] = None
    bounds: Optional[BoundReport] = None
    iterates: Optional[list] = None
    message: str = ""

    @property
    def iterations(self):
        return len(self.records) - 1

    @property
    def converged(self):
        return self.status == "converged"


def compute_bounds(spectrum, omega, norm, f0_gap, eps):
    """Contraction factor, its ω = 1 form and the iteration-complexity bound."""
    omega = check_omega(omega)
    kappa = spectrum.kappa
    c_omega = 1.0 - omega * (2.0 - omega) * 4.0 * kappa / (kappa + 1.0) ** 2
    corollary = ((kappa - 1.0) / (kappa + 1.0)) ** 2
    ell = norm.pure_ell
    K = None
    if ell is not None and f0_gap > 0 and eps > 0:
        K = ((kappa + 1.0) ** 2 / (4.0 * kappa) / (omega * (2.0 - omega))
             * math.log(kappa ** (2.0 * ell) * f0_gap / eps))
    return BoundReport(c_omega=max(c_omega, 0.0), corollary_rate=corollary, K_bound=K, kappa_tilde=kappa)


def run_flexible(problem, config, z0=None, op=None, keep_iterates=False):
    """Iterate ``z <- z - ω P^{-T} P^{-1} W_k a_k`` until ``||g||_2^2 < tol`` or ``max_iter``."""
    if config.method != "flexible":
        raise InvalidArgumentError(f"run_flexible needs method 'flexible', got {config.method!r}")
    n = problem.dim
    if op is None:
        op = PreconditionedOperator(problem, resolve_preconditioner(config.precond, problem))
    config.strategy.validate_for(n)
    z = np.zeros(n) if z0 is None else as_float_vector(z0, n, name="z0").copy()
    precond, norm, omega, record = op.precond, config.norm, config.omega, config.record_bounds
    A, b = problem.A, problem.b
    z_star = problem.minimizer
    state = StrategyState.initial(config.seed)
    records, iterates = [], [z.copy()] if keep_iterates else None
    prev_wn = None
    status, message = "max_iter", ""

    for k in range(config.max_iter + 1):
        g = A @ z - b
        gsq = float(g @ g)
        if not math.isfinite(gsq):
            status, message = "failed", "non-finite gradient"
            break
        gt = precond.apply_inv(g)
        wn = weighted_norm_sq(norm, op, gt)
        rec = TraceRecord(k, 0.5 * float(g @ (z - z_star)), gsq, wn)
        if prev_wn is not None:
            rec.contraction_ratio = wn / prev_wn if prev_wn > 0 else 0.0
        if record:
            err = precond.apply_inv(A @ (z - z_star))
            rec.error_norm_sq = weighted_norm_sq(norm, op, err)
        records.append(rec)
        if gsq < config.tol_grad_sq:
            status = "converged"
            break
        if k == config.max_iter:
            break
        W = make_directions(config.strategy, state, op, z, g)
        try:
            step = flexible_step(op, norm, W, gt, config.rel_cutoff, stationarity=record)
        except DegenerateSystemError as exc:
            status, message = "degenerate", str(exc)
            break
        rec.m_k, rec.a_k, rec.truncated_rank = W.shape[1], step.a, step.truncated_rank
        if record:
            rec.stationarity = step.stationarity
            Mg = shifted_poly_apply(norm, op, gt)
            Ag = op.matvec(gt)
            den = float(Mg @ Ag)
            theta = float(Mg @ gt) / den if den > 0 else 0.0
            rec.mgd_bound = weighted_norm_sq(norm, op, gt - omega * theta * Ag)
            rec.step_gnorm_sq = weighted_norm_sq(norm, op, gt - omega * step.atilde_direction)
        state = update_state(state, z, g)
        z = z - omega * precond.apply_inv(step.direction, transposed=True)
        if keep_iterates:
            iterates.append(z.copy())
        prev_wn = wn

    bounds = None
    if record:
        bounds = compute_bounds(op.spectrum, omega, norm, records[0].f_gap, config.tol_grad_sq)
    return RunResult(records, status, z, config, bounds, iterates, message)


@dataclass
class CheckResult:
    passed: bool
    worst_margin: float
    detail: str = ""


@dataclass
class VerificationReport:
    checks: dict

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def to_json(self):
        return {name: {"passed": c.passed, "worst_margin": c.worst_margin, "detail": c.detail}
                for name, c in self.checks.items()}


def _check(margins, detail=""):
    worst = max(margins) if len(margins) else -math.inf
    return CheckResult(bool(worst <= 0.0), float(worst), detail)


def verify_run(result, bounds=None, eps=None, slack=BOUND_SLACK):
    """Check a recorded run against the proven per-iteration and envelope bounds.

    Margins are ``observed - allowed``; a check passes when its worst margin is <= 0.
    """
    bounds = bounds or result.bounds
    if bounds is None:
        raise InvalidArgumentError("verify_run needs bounds; run with record_bounds=True")
    config = result.config
    recs = result.records
    c = bounds.c_omega
    checks = {}

    ratios = [r.contraction_ratio for r in recs[1:]]
    checks["contraction"] = _check([q - (c + slack) for q in ratios], f"c(omega) = {c:.12g}")
    if config is not None and config.omega == 1.0:
        checks["corollary"] = _check([q - (bounds.corollary_rate + slack) for q in ratios])

    wn0 = recs[0].weighted_gnorm_sq
    checks["envelope"] = _check([r.weighted_gnorm_sq - (c**r.k * wn0 + slack * wn0) for r in recs])

    dom = [r.step_gnorm_sq - (r.mgd_bound + slack * r.weighted_gnorm_sq)
           for r in recs if r.mgd_bound is not None]
    checks["domination"] = _check(dom)

    stat = [r.stationarity - slack for r in recs if r.stationarity is not None]
    checks["stationarity"] = _check(stat)

    errs = [r.error_norm_sq for r in recs]
    if errs and errs[0] is not None:
        e0 = errs[0]
        checks["distance"] = _check([e - (c**k * e0 + slack * e0) for k, e in enumerate(errs)])

    ell = config.norm.pure_ell if config is not None else None
    if ell is not None:
        f0 = recs[0].f_gap
        growth = bounds.kappa_tilde ** (2.0 * ell)
        checks["f_gap"] = _check([r.f_gap - (growth * c**r.k * f0 + slack * f0) for r in recs])

    if bounds.K_bound is not None:
        eps = eps if eps is not None else config.tol_grad_sq
        K = max(0, math.ceil(bounds.K_bound))
        hit = next((r.k for r in recs if r.f_gap <= eps), None)
        if hit is not None:
            checks["complexity"] = _check([hit - K], f"reached f_gap <= {eps:g} at k = {hit}, bound {K}")
        else:
            # not reached yet: only a violation if the run already went past the bound
            checks["complexity"] = _check([recs[-1].k + 1 - K], f"f_gap <= {eps:g} not reached, bound {K}")
    return VerificationReport(checks)
