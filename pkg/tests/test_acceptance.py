"""Acceptance checks: one PASS/FAIL line per criterion, printed even under capture."""
import json
import math
import time

import numpy as np
import pytest

from flexquad.baselines import run_textbook_cg, run_textbook_cr
from flexquad.cli import main
from flexquad.directions import StrategySpec
from flexquad.linops import PreconditionedOperator, generate_problem, initial_point
from flexquad.norms import NormSpec
from flexquad.presets import FRAMEWORK_PRESETS, get_preset
from flexquad.runner import BOUND_SLACK, RunConfig, compute_bounds, run_flexible, verify_run
from flexquad.stepsolver import flexible_step

from conftest import rel_err, uniform_spectrum_problem

SEEDS = range(1, 21)
OMEGAS = (0.5, 0.95, 1.0, 1.5)
N, M = 100, 120
GRADIENT_PRESETS = ("sd", "mg", "lmgd1")
TIME_BUDGET = 60.0


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {number:>2}] {'PASS' if ok else 'FAIL'}: {detail}")


def _sweep(record):
    for seed in SEEDS:
        p = generate_problem(seed, M, N)
        op = PreconditionedOperator(p)
        z0 = initial_point(seed, N)
        for name in FRAMEWORK_PRESETS:
            for omega in OMEGAS:
                config = get_preset(name, omega=omega, seed=seed, record_bounds=record)
                yield seed, name, omega, op, run_flexible(p, config, z0=z0, op=op)


@pytest.fixture(scope="module")
def timed_sweep():
    """Criterion-1 sweep without bound bookkeeping; worst margins against c(ω) and the ω = 1 rate."""
    start = time.perf_counter()
    worst_c, worst_rate, runs = -math.inf, -math.inf, 0
    for seed, name, omega, op, res in _sweep(record=False):
        kappa = op.spectrum.kappa
        c = 1.0 - omega * (2.0 - omega) * 4.0 * kappa / (kappa + 1.0) ** 2
        ratios = np.array([r.contraction_ratio for r in res.records[1:]])
        runs += 1
        if ratios.size:
            worst_c = max(worst_c, float(np.max(ratios - c)))
            if omega == 1.0:
                rate = ((kappa - 1.0) / (kappa + 1.0)) ** 2
                worst_rate = max(worst_rate, float(np.max(ratios - rate)))
    return {"elapsed": time.perf_counter() - start, "worst_c": worst_c, "worst_rate": worst_rate,
            "runs": runs}


@pytest.fixture(scope="module")
def recorded_sweep():
    """Same sweep with bounds recorded and every run verified."""
    out = {"domination": -math.inf, "stationarity": -math.inf, "complexity": [], "runs": 0}
    for seed, name, omega, op, res in _sweep(record=True):
        out["runs"] += 1
        for rec in res.records:
            if rec.mgd_bound is not None:
                margin = rec.step_gnorm_sq - rec.mgd_bound
                out["domination"] = max(out["domination"], margin / rec.weighted_gnorm_sq)
            if omega == 1.0 and rec.stationarity is not None:
                out["stationarity"] = max(out["stationarity"], rec.stationarity)
        if name in GRADIENT_PRESETS:
            check = verify_run(res).checks["complexity"]
            out["complexity"].append((seed, name, omega, check))
    return out


def test_1_contraction_bound(capsys, timed_sweep):
    s = timed_sweep
    ok_bound = s["worst_c"] <= BOUND_SLACK
    ok_time = s["elapsed"] < TIME_BUDGET
    report(capsys, 1, ok_bound and ok_time,
           f"{s['runs']} runs, worst ratio - c(omega) = {s['worst_c']:.3e} (allowed 1e-10), "
           f"{s['elapsed']:.1f} s (target < {TIME_BUDGET:.0f} s)")
    assert ok_bound and ok_time


def test_2_corollary_rate(capsys, timed_sweep):
    w = timed_sweep["worst_rate"]
    ok = w <= BOUND_SLACK
    report(capsys, 2, ok, f"omega = 1, worst ratio - ((k-1)/(k+1))^2 = {w:.3e} (allowed 1e-10)")
    assert ok


def test_3_domination(capsys, recorded_sweep):
    w = recorded_sweep["domination"]
    ok = w <= BOUND_SLACK
    report(capsys, 3, ok, f"{recorded_sweep['runs']} runs, worst (step - theta step) / ||g||_N^2 = {w:.3e} "
                          f"(allowed 1e-10)")
    assert ok


def test_4_stationarity(capsys, recorded_sweep):
    w = recorded_sweep["stationarity"]
    ok = w <= 1e-10
    report(capsys, 4, ok, f"omega = 1, worst relative orthogonality residual = {w:.3e} (allowed 1e-10)")
    assert ok


def _flexible_iterates(p, norm, K):
    config = RunConfig(StrategySpec("grad-prev-step"), norm, max_iter=K, tol_grad_sq=1e-30)
    return run_flexible(p, config, keep_iterates=True).iterates


def test_5_cg_cr_equivalence(capsys):
    worst = {"cg": 0.0, "cr": 0.0}
    for n in (10, 50):
        for seed in range(5):
            p = uniform_spectrum_problem(seed, n, kappa=100.0)
            K = min(n, 25)
            for key, ell, ref_run in (("cg", 0.0, run_textbook_cg), ("cr", 0.5, run_textbook_cr)):
                flex = _flexible_iterates(p, NormSpec.from_ell(ell), K)
                ref = ref_run(p, tol=1e-30, max_iter=K, keep_iterates=True).iterates
                common = min(len(flex), len(ref), K + 1)
                worst[key] = max(worst[key], max(rel_err(flex[k], ref[k]) for k in range(1, common)))
    ok = max(worst.values()) <= 1e-8
    report(capsys, 5, ok, f"n in {{10, 50}}, kappa = 100, worst relative iterate gap: "
                          f"CG {worst['cg']:.2e}, CR {worst['cr']:.2e} (allowed 1e-8)")
    assert ok


def test_6_one_step_convergence(capsys):
    worst = 0.0
    for seed in range(10):
        p = generate_problem(100 + seed, 12, 10)
        op = PreconditionedOperator(p)
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(10)
        g = p.A @ z - p.b
        W = rng.standard_normal((10, 10))
        W[:, 0] = g
        assert np.linalg.matrix_rank(W) == 10
        z1 = z - flexible_step(op, NormSpec.from_ell(0), W, g).direction
        worst = max(worst, rel_err(z1, p.known_solution))
    ok = worst <= 1e-8
    report(capsys, 6, ok, f"n = 10, nonsingular W with g as first column, worst ||z1 - z*|| / ||z*|| = "
                          f"{worst:.2e} (allowed 1e-8)")
    assert ok


def test_7_forsythe_is_restarted_cg(capsys):
    worst = {}
    for s in (2, 3):
        worst[s] = 0.0
        for seed in range(5):
            p = uniform_spectrum_problem(seed, 20, kappa=100.0)
            steps = 12
            flex = run_flexible(p, RunConfig(StrategySpec("forsythe", s=s), max_iter=steps, tol_grad_sq=1e-30),
                                keep_iterates=True).iterates
            ref = run_textbook_cg(p, tol=1e-30, max_iter=steps * s, restart=s, keep_iterates=True).iterates
            for j in range(1, min(len(flex), (len(ref) - 1) // s + 1)):
                worst[s] = max(worst[s], rel_err(flex[j], ref[j * s]))
    ok = max(worst.values()) <= 1e-8
    report(capsys, 7, ok, f"n = 20, worst gap at restart boundaries: s = 2 {worst[2]:.2e}, "
                          f"s = 3 {worst[3]:.2e} (allowed 1e-8)")
    assert ok


def test_8_gdwgm_recovery(capsys):
    gap = 0.0
    for n in (10, 50):
        p = uniform_spectrum_problem(7, n, kappa=100.0)
        K = min(n, 25)
        flex = _flexible_iterates(p, NormSpec.gdwgm(0.0), K)
        ref = run_textbook_cg(p, tol=1e-30, max_iter=K, keep_iterates=True).iterates
        gap = max(gap, max(rel_err(flex[k], ref[k]) for k in range(1, min(len(flex), len(ref)))))
    iters = []
    for seed in SEEDS:
        res = run_flexible(generate_problem(seed, M, N), get_preset("gdwgm", mu=0.5, seed=seed),
                           z0=initial_point(seed, N))
        iters.append(res.iterations if res.converged else None)
    converged = all(i is not None for i in iters)
    ok = gap <= 1e-8 and converged
    worst_iters = max(i for i in iters if i is not None) if any(i is not None for i in iters) else None
    report(capsys, 8, ok, f"mu = 0 vs CG worst gap {gap:.2e} (allowed 1e-8); mu = 0.5 converged on "
                          f"{sum(i is not None for i in iters)}/{len(iters)} seeds, at most {worst_iters} "
                          f"iterations (cap 1000)")
    assert ok


def test_9_complexity_bound(capsys, recorded_sweep):
    checks = recorded_sweep["complexity"]
    failed = [(seed, name, omega) for seed, name, omega, c in checks if not c.passed]
    worst = max(c.worst_margin for *_, c in checks)
    ok = not failed and len(checks) == len(SEEDS) * len(GRADIENT_PRESETS) * len(OMEGAS)
    report(capsys, 9, ok, f"{len(checks)} gradient-only runs, worst (iterations - ceil(K)) = {worst:.0f}, "
                          f"violations {failed}")
    assert ok


def test_complexity_bound_is_informative():
    # K is finite and larger than one iteration on the sweep problems
    p = generate_problem(1, M, N)
    op = PreconditionedOperator(p)
    res = run_flexible(p, get_preset("sd", seed=1, max_iter=1))
    b = compute_bounds(op.spectrum, 1.0, NormSpec.from_ell(0), res.records[0].f_gap, 1e-6)
    assert 1 < b.K_bound < math.inf


@pytest.mark.slow
def test_10_full_scale_protocol(capsys, tmp_path):
    start = time.perf_counter()
    results = {}
    for seed in (42, 1, 2, 3):
        out = tmp_path / str(seed)
        code = main(["--seed", str(seed), "--n", "1000", "--m", "1200", "--tol", "1e-6", "--max-iter", "1000",
                     "--preset", "cg", "--out", str(out)])
        summary = json.loads((out / "summary.json").read_text())["runs"]["cg"]
        results[seed] = (code, summary["status"], summary["iterations"])
    elapsed = time.perf_counter() - start
    ok = all(c == 0 and st == "converged" and it <= 400 for c, st, it in results.values()) and elapsed <= 600
    its = ", ".join(f"seed {s}: {it}" for s, (_, _, it) in results.items())
    report(capsys, 10, ok, f"n = 1000, m = 1200, CG iterations {its} (accept <= 400), {elapsed:.1f} s "
                           f"(limit 600 s)")
    assert ok


def test_11_determinism(capsys, tmp_path):
    cfg = {
        "problem": {"seed": 5, "m": 60, "n": 50},
        "seed": 5,
        "runs": [{"name": "gdrd-relaxed", "preset": "gdrd", "omega": 0.95},
                 {"name": "custom", "strategy": {"kind": "forsythe", "s": 3}, "norm": {"ell": 0.5}}],
        "presets": ["cg", "mom-rand", "gdwgm", "nagm"],
        "max_iter": 300,
        "emit": {"bounds": True},
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for tag in ("a", "b"):
        assert main(["--config", str(path), "--out", str(tmp_path / tag)]) == 0
        outs.append({f.name: f.read_bytes() for f in sorted((tmp_path / tag).iterdir())})
    csvs = [name for name in outs[0] if name.endswith(".csv")]
    ok = len(csvs) == 6 and outs[0].keys() == outs[1].keys() and all(outs[0][f] == outs[1][f] for f in outs[0])
    report(capsys, 11, ok, f"two executions of a {len(csvs)}-run config: CSV and JSON outputs byte-identical")
    assert ok
