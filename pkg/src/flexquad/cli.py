"""Command-line harness: build or load one problem, run several methods from a shared start, write traces.

Experiment config (JSON)::

    {
      "problem": {"seed": 42, "m": 120, "n": 100}          # or {"A": "A.txt", "b": "b.txt"}
      "seed": 42,                                         # x0 and random-direction seed
      "runs": [{"name": "cg"}, {"name": "f2-relaxed", "preset": "forsythe2", "omega": 0.95},
               {"name": "custom", "strategy": {"kind": "forsythe", "s": 3}, "norm": {"ell": 0.5}}],
      "presets": ["sd", "mg"],                            # shorthand for runs named after presets
      "tol": 1e-6, "max_iter": 1000, "precond": "identity", "omega": 1.0,
      "output_dir": "out",
      "emit": {"csv": true, "json": true, "bounds": false}
    }

Inline flags override values from the file. Exit codes: 0 done, 2 bad
configuration, 3 numerical failure in some run.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .directions import StrategySpec
from .exceptions import DegenerateSystemError, InvalidArgumentError, UnsupportedSizeError
from .io import load_problem, run_summary, write_json, write_trace_csv
from .linops import PreconditionedOperator, generate_problem, initial_point
from .norms import NormSpec
from .presets import DEFAULT_MU, FRAMEWORK_PRESETS, get_preset, run
from .runner import PRECONDITIONERS, RunConfig, resolve_preconditioner, verify_run

log = logging.getLogger("flexquad")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_N, DEFAULT_M, DEFAULT_SEED = 100, 120, 42
_RUN_FIELDS = {"name", "preset", "method", "strategy", "norm", "omega", "ell", "mu",
               "precond", "tol", "max_iter", "rel_cutoff"}
_TOP_FIELDS = {"problem", "seed", "runs", "presets", "tol", "max_iter", "precond", "omega",
               "ell", "mu", "output_dir", "emit"}


class ConfigError(Exception):
    pass


def build_parser():
    p = argparse.ArgumentParser(prog="flexquad", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="JSON experiment file")
    p.add_argument("--generate", action="store_true", help="generate the random B^T B problem")
    p.add_argument("--A", dest="matrix", help="matrix file (first line n, then n rows)")
    p.add_argument("--b", dest="rhs", help="right-hand side file")
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int, help=f"rows of B (default {DEFAULT_M})")
    p.add_argument("--n", type=int, help=f"dimension (default {DEFAULT_N})")
    p.add_argument("--preset", action="append", help="method name, repeatable")
    p.add_argument("--omega", type=float)
    p.add_argument("--ell", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--precond", choices=PRECONDITIONERS)
    p.add_argument("--tol", type=float, help="stop when ||g||^2 < tol (default 1e-6)")
    p.add_argument("--max-iter", type=int, help="iteration cap (default 1000)")
    p.add_argument("--bounds", action="store_true", help="record and verify the convergence bounds")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _TOP_FIELDS
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    return cfg


def merge_args(cfg, args):
    """Fold inline flags into the file config; flags win."""
    cfg = dict(cfg)
    problem = dict(cfg.get("problem") or {})
    if args.generate or args.m is not None or args.n is not None:
        problem.pop("A", None)
        problem.pop("b", None)
    if args.matrix or args.rhs:
        problem = {"A": args.matrix, "b": args.rhs}
    for key in ("m", "n"):
        if getattr(args, key) is not None:
            problem[key] = getattr(args, key)
    if args.seed is not None:
        cfg["seed"] = args.seed
        if "A" not in problem:
            problem["seed"] = args.seed
    cfg["problem"] = problem
    if args.preset:
        cfg["runs"] = [{"name": name} for name in args.preset]
        cfg.pop("presets", None)
    for key, val in (("omega", args.omega), ("ell", args.ell), ("mu", args.mu), ("precond", args.precond),
                     ("tol", args.tol), ("max_iter", args.max_iter), ("output_dir", args.out)):
        if val is not None:
            cfg[key] = val
    if args.bounds:
        cfg["emit"] = {**(cfg.get("emit") or {}), "bounds": True}
    return cfg


def build_problem(spec, seed):
    if "A" in spec or "b" in spec:
        if not spec.get("A") or not spec.get("b"):
            raise ConfigError("file problems need both 'A' and 'b'")
        return load_problem(spec["A"], spec["b"], spec.get("solution")), {"A": spec["A"], "b": spec["b"]}
    pseed = int(spec.get("seed", seed))
    n = int(spec.get("n", DEFAULT_N))
    m = int(spec.get("m", spec.get("rows", DEFAULT_M)))
    return generate_problem(pseed, m, n), {"seed": pseed, "m": m, "n": n}


def build_run(entry, cfg, seed):
    """One named ``RunConfig`` from a run entry plus experiment-wide defaults."""
    if not isinstance(entry, dict) or "name" not in entry:
        raise ConfigError(f"each run needs a 'name': {entry!r}")
    unknown = set(entry) - _RUN_FIELDS
    if unknown:
        raise ConfigError(f"run {entry['name']!r}: unknown fields {sorted(unknown)}")

    def pick(key, default=None):
        return entry.get(key, cfg.get(key, default))

    name = str(entry["name"])
    custom = any(k in entry for k in ("strategy", "norm", "method"))
    preset_name = entry.get("preset", None if custom else name)
    mu = pick("mu", DEFAULT_MU)
    base = get_preset(preset_name, mu=mu) if preset_name else RunConfig()
    changes = {"seed": seed}
    if "method" in entry:
        changes["method"] = entry["method"]
    if "strategy" in entry:
        changes["strategy"] = StrategySpec.from_json(entry["strategy"])
    if "norm" in entry:
        changes["norm"] = NormSpec.from_json(entry["norm"])
    elif pick("ell") is not None and base.method == "flexible":
        if preset_name == "gdwgm" and "mu" in entry:
            raise ConfigError(f"run {name!r}: both ell and mu given for gdwgm")
        if preset_name != "gdwgm" or "ell" in entry:
            changes["norm"] = NormSpec.from_ell(pick("ell"))
    for key, field in (("omega", "omega"), ("tol", "tol_grad_sq"), ("max_iter", "max_iter"),
                       ("precond", "precond"), ("rel_cutoff", "rel_cutoff")):
        val = pick(key)
        if val is not None:
            changes[field] = val
    method = changes.get("method", base.method)
    if method != "flexible":
        # experiment-wide ω only applies to the framework runs
        if float(entry.get("omega", 1.0)) != 1.0:
            raise ConfigError(f"run {name!r}: method {method!r} has no relaxation")
        changes.pop("omega", None)
    emit = cfg.get("emit") or {}
    changes["record_bounds"] = bool(emit.get("bounds", False)) and changes.get("method", base.method) == "flexible"
    return name, replace(base, **changes)


def build_experiment(cfg):
    seed = int(cfg.get("seed", (cfg.get("problem") or {}).get("seed", DEFAULT_SEED)))
    entries = list(cfg.get("runs") or [])
    entries += [{"name": n} for n in cfg.get("presets") or []]
    if not entries:
        raise ConfigError("no runs configured; pass --preset NAME or a config with 'runs'")
    runs = [build_run(e, cfg, seed) for e in entries]
    names = [n for n, _ in runs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ConfigError(f"run names must be unique, repeated: {dupes}")
    return seed, runs


def run_experiment(cfg):
    """Execute a merged config; returns ``(summary, results)``."""
    seed, runs = build_experiment(cfg)
    problem, problem_echo = build_problem(cfg.get("problem") or {}, seed)
    for _, config in runs:
        config.strategy.validate_for(problem.dim)
    z0 = initial_point(seed, problem.dim)
    ops = {}
    results, summary = {}, {"problem": problem_echo, "seed": seed, "runs": {}}
    for name, config in runs:
        key = config.precond if isinstance(config.precond, str) else id(config.precond)
        if key not in ops:
            ops[key] = PreconditionedOperator(problem, resolve_preconditioner(config.precond, problem))
        op = ops[key]
        if config.method == "flexible":
            config.norm.check_positive(op.spectrum)
        log.info("running %s", name)
        res = run(problem, config, z0=z0, op=op)
        verification = verify_run(res) if res.bounds is not None else None
        results[name] = res
        summary["runs"][name] = run_summary(res, verification)
        log.info("%s: %s after %d iterations", name, res.status, res.iterations)
    return summary, results


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = _load_config(args.config) if args.config else {}
        cfg = merge_args(cfg, args)
        with np.errstate(all="ignore"):
            summary, results = run_experiment(cfg)
    except (ConfigError, InvalidArgumentError, UnsupportedSizeError) as exc:
        print(f"flexquad: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateSystemError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"flexquad: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out = cfg.get("output_dir") or "."
    emit = cfg.get("emit") or {}
    try:
        os.makedirs(out, exist_ok=True)
        if emit.get("csv", True):
            for name, res in results.items():
                write_trace_csv(os.path.join(out, f"{name}.csv"), res)
        if emit.get("json", True):
            write_json(os.path.join(out, "summary.json"), summary)
    except OSError as exc:
        print(f"flexquad: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for name, res in results.items():
        print(f"{name}: {res.status} after {res.iterations} iterations, f_gap {res.records[-1].f_gap:.3e}")
    failed = [n for n, r in results.items() if r.status in ("failed", "degenerate")]
    if failed:
        print(f"flexquad: numerical failure in {failed}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
