"""Named method catalog and a single entry point that dispatches a RunConfig to its solver.

All presets use ω = 1, P = I, ε = 1e-6 and 1000 iterations unless overridden.
On the generated problems (κ in the tens of thousands at n = 100) several
methods usually stop at the iteration cap: the gradient-only family ``sd``,
``mg``, ``lmgd1`` and the random-direction ``gdrd`` contract by a factor close
to 1 per step, ``mom-rand`` loses the conjugacy that makes ``[g, s]`` fast once
a random column enters, and ``nagm`` needs O(sqrt(κ) log(1/ε)) steps. These
are listed in ``SLOW_PRESETS``.
"""
from dataclasses import replace

from .baselines import run_nagm, run_textbook_cg, run_textbook_cr
from .directions import StrategySpec
from .exceptions import InvalidArgumentError
from .norms import NormSpec
from .runner import RunConfig, run_flexible

DEFAULT_MU = 0.5
SLOW_PRESETS = frozenset({"sd", "mg", "lmgd1", "gdrd", "mom-rand", "nagm"})


def presets(mu=DEFAULT_MU):
    """Return ``{name: RunConfig}``; ``mu`` is the GDWGM weight."""
    grad = StrategySpec("gradient")
    gps = StrategySpec("grad-prev-step")
    ell = NormSpec.from_ell
    return {
        "sd": RunConfig(grad, ell(0)),
        "mg": RunConfig(grad, ell(0.5)),
        "lmgd1": RunConfig(grad, ell(1)),
        "cg": RunConfig(gps, ell(0)),
        "cr": RunConfig(gps, ell(0.5)),
        "cd1": RunConfig(gps, ell(1)),
        "forsythe2": RunConfig(StrategySpec("forsythe", s=2), ell(0)),
        "forsythe3": RunConfig(StrategySpec("forsythe", s=3), ell(0)),
        "forsythe4": RunConfig(StrategySpec("forsythe", s=4), ell(0)),
        "gdwgm": RunConfig(gps, NormSpec.gdwgm(mu)),
        "gdrd": RunConfig(StrategySpec("grad-random"), ell(0)),
        "forsythe-mom": RunConfig(StrategySpec("forsythe-momentum"), ell(0)),
        "mom-rand": RunConfig(StrategySpec("momentum-random"), ell(0)),
        "nagm": RunConfig(method="nagm"),
    }


PRESET_NAMES = tuple(presets())
FRAMEWORK_PRESETS = tuple(name for name in PRESET_NAMES if name != "nagm")


def get_preset(name, mu=DEFAULT_MU, **overrides):
    catalog = presets(mu)
    if name not in catalog:
        raise InvalidArgumentError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    config = catalog[name]
    return replace(config, **overrides) if overrides else config


def run(problem, config, z0=None, op=None, keep_iterates=False):
    """Run any ``RunConfig``: the multi-direction loop or one of the reference baselines."""
    if config.method == "flexible":
        return run_flexible(problem, config, z0=z0, op=op, keep_iterates=keep_iterates)
    if config.precond != "identity":
        raise InvalidArgumentError(f"method {config.method!r} does not take a preconditioner")
    kw = dict(tol=config.tol_grad_sq, max_iter=config.max_iter, z0=z0, norm=config.norm,
              keep_iterates=keep_iterates, config=config)
    if config.method == "nagm":
        spectrum = op.spectrum if op is not None else None
        return run_nagm(problem, spectrum=spectrum, **kw)
    if config.method == "textbook-cg":
        return run_textbook_cg(problem, **kw)
    return run_textbook_cr(problem, **kw)
