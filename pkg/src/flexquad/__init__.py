"""Multi-direction exact-step minimization of SPD quadratics with relaxation and preconditioning."""
from .baselines import run_nagm, run_textbook_cg, run_textbook_cr
from .directions import StrategySpec, StrategyState, make_directions
from .estimator import FlexibleQuadraticSolver
from .exceptions import (DegenerateSystemError, InvalidArgumentError, NotPositiveDefiniteError,
                         UnsupportedSizeError)
from .linops import (Preconditioner, PreconditionedOperator, ProblemInstance, SpectrumInfo,
                     generate_problem, initial_point, spd_with_spectrum)
from .norms import NormSpec, assemble_gram, weighted_norm_sq
from .presets import get_preset, presets, run
from .runner import (BoundReport, RunConfig, RunResult, TraceRecord, compute_bounds, run_flexible,
                     verify_run)
from .stepsolver import StepResult, flexible_step, solve_step

__version__ = "0.1.0"
