"""Direction strategies: which sub-search directions make up ``W_k`` each iteration.

Every strategy puts the current gradient ``g(z_k)`` in column 1 untouched.
Extra columns are rescaled to ``||g||`` (the step only depends on the span)
and dropped when nearly dependent on earlier columns.

Columns live in the original ``z`` variables and the step applies ``P^{-1}``.
History columns are mapped so that ``P^{-1} w`` is the matching quantity in
the preconditioned variables: the previous step becomes ``P P^T (z_k - z_{k-1})``
and Krylov columns use ``A P^{-T} P^{-1}``. With ``P = I`` these reduce to
``z_k - z_{k-1}`` and ``A^j g``.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidArgumentError

DEPENDENCE_COS = 1.0 - 1e-12

_ALIASES = {
    "gradient": "gradient",
    "gradientonly": "gradient",
    "grad-prev-step": "grad-prev-step",
    "gradprevstep": "grad-prev-step",
    "forsythe": "forsythe",
    "forsythe-momentum": "forsythe-momentum",
    "forsythemomentum": "forsythe-momentum",
    "grad-random": "grad-random",
    "gradrandom": "grad-random",
    "momentum-random": "momentum-random",
    "momentumrandom": "momentum-random",
    "grad-step-ydiff": "grad-step-ydiff",
    "gradstepydiff": "grad-step-ydiff",
}


@dataclass(frozen=True)
class StrategySpec:
    """Which columns to build.

    kinds: ``gradient`` [g]; ``grad-prev-step`` [g, s]; ``forsythe`` [g, Ag, ..., A^{s-1} g];
    ``forsythe-momentum`` [g, Ag, s]; ``grad-random`` [g, r_1..r_q]; ``momentum-random`` [g, s, r];
    ``grad-step-ydiff`` [g, s, y] with ``s = z_k - z_{k-1}``, ``y = g_k - g_{k-1}``.
    """

    kind: str = "gradient"
    s: int = 2
    n_random: int = 1

    def __post_init__(self):
        key = str(self.kind).lower().replace("_", "-")
        kind = _ALIASES.get(key, _ALIASES.get(key.replace("-", "")))
        if kind is None:
            raise InvalidArgumentError(f"unknown strategy kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "forsythe" and int(self.s) < 1:
            raise InvalidArgumentError(f"forsythe s must be >= 1, got {self.s}")
        if int(self.n_random) < 1:
            raise InvalidArgumentError(f"n_random must be >= 1, got {self.n_random}")
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "n_random", int(self.n_random))

    @property
    def uses_random(self):
        return self.kind in ("grad-random", "momentum-random")

    def validate_for(self, n):
        if self.kind == "forsythe" and self.s > n:
            raise InvalidArgumentError(f"forsythe s = {self.s} exceeds the dimension {n}")

    def to_json(self):
        out = {"kind": self.kind}
        if self.kind == "forsythe":
            out["s"] = self.s
        if self.kind == "grad-random" and self.n_random != 1:
            out["n_random"] = self.n_random
        return out

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            return cls(obj)
        if not isinstance(obj, dict) or "kind" not in obj:
            raise InvalidArgumentError(f"strategy must be an object with 'kind': {obj!r}")
        unknown = set(obj) - {"kind", "s", "n_random"}
        if unknown:
            raise InvalidArgumentError(f"unknown strategy fields {sorted(unknown)}")
        return cls(**obj)


@dataclass
class StrategyState:
    prev_z: Optional[np.ndarray] = None
    prev_g: Optional[np.ndarray] = None
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    iteration: int = 0

    @classmethod
    def initial(cls, seed=0):
        return cls(rng=np.random.default_rng(seed))


def update_state(state, z, g):
    """Remember ``z_k`` and ``g_k`` for the next iteration's history columns (in place)."""
    state.prev_z = np.array(z, copy=True)
    state.prev_g = np.array(g, copy=True)
    state.iteration += 1
    return state


def _filter_columns(cols):
    """Keep columns whose cosine to the span of the kept ones stays below ``DEPENDENCE_COS``."""
    if len(cols) == 2:
        w0, w1 = cols
        n0, n1 = math.sqrt(w0 @ w0), math.sqrt(w1 @ w1)
        if not math.isfinite(n1) or n1 == 0.0 or abs(w0 @ w1) / (n0 * n1) > DEPENDENCE_COS:
            return [w0]
        return cols
    kept = [cols[0]]
    basis = np.empty((len(cols), cols[0].size))
    basis[0] = cols[0] / math.sqrt(cols[0] @ cols[0])
    for w in cols[1:]:
        nw = math.sqrt(w @ w)
        if not math.isfinite(nw) or nw == 0.0:
            continue
        B = basis[:len(kept)]
        proj = B @ w
        if math.sqrt(proj @ proj) / nw > DEPENDENCE_COS:
            continue
        r = w - proj @ B
        r = r - (B @ r) @ B
        nr = math.sqrt(r @ r)
        if nr == 0.0:
            continue
        basis[len(kept)] = r / nr
        kept.append(w)
    return kept


def make_directions(spec, state, op, z, g):
    """Return ``W`` (n x m_k) with ``W[:, 0] == g``."""
    kind = spec.kind
    if kind == "gradient":
        return g[:, None]
    gnorm = math.sqrt(g @ g)

    def scaled(v):
        nv = math.sqrt(v @ v)
        return v * (gnorm / nv) if nv > 0 else v

    precond = op.precond
    A = op.problem.A
    cols = [g]
    have_history = state.prev_z is not None

    def step_column():
        return scaled(precond.apply_metric(z - state.prev_z))

    if kind == "grad-prev-step":
        if have_history:
            cols.append(step_column())
    elif kind in ("forsythe", "forsythe-momentum"):
        s = spec.s if kind == "forsythe" else 2
        cur = g
        for _ in range(s - 1):
            cur = scaled(A @ precond.apply_metric_inv(cur))
            cols.append(cur)
        if kind == "forsythe-momentum" and have_history:
            cols.append(step_column())
    elif kind == "grad-random":
        for _ in range(spec.n_random):
            cols.append(scaled(state.rng.standard_normal(op.dim)))
    elif kind == "momentum-random":
        if have_history:
            cols.append(step_column())
        cols.append(scaled(state.rng.standard_normal(op.dim)))
    elif kind == "grad-step-ydiff":
        if have_history:
            cols.append(step_column())
            cols.append(scaled(g - state.prev_g))
    return np.array(_filter_columns(cols)).T
