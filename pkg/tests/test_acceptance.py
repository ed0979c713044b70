"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Tolerances are the stated ones; nothing here is loosened to make a line green.
Run alone with ``pytest tests/test_acceptance.py -v``; the lines appear in the
"acceptance criteria" section of the terminal summary.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from bandit_nash import games as G
from bandit_nash.diagnostics import estimate_smoothed_gradient, lemma3_ratio_scan, out_of_set_frequency
from bandit_nash.experiment import load_config, run_experiment
from bandit_nash.learner import run as bandit_run
from bandit_nash.schedules import REFERENCE_EXPONENTS, ScheduleSpec, validate_exponents
from bandit_nash.sets import Ball, Box, Free, Polyhedron, Simplex, random_polyhedron
from bandit_nash.suites import COURNOT_PROBES
from bandit_nash.vi import least_norm_affine, one_timescale_run, regularized_solution

from conftest import ACCEPTANCE_LINES

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
B = np.array([[1.0, -1.0], [-1.0, 1.0]])
b = np.array([-1.0, 1.0])


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_least_norm_selection():
    start = time.perf_counter()
    game = G.affine_monotone(B, b)
    oracle = np.linalg.pinv(B) @ -b
    d = [float(np.linalg.norm(regularized_solution(game, e).point - oracle))
         for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    elapsed = time.perf_counter() - start
    ok = all(y < x for x, y in zip(d, d[1:])) and d[-1] <= 1e-3 and elapsed < 1.0
    report(1, ok, f"distances {[f'{v:.3g}' for v in d]}, {elapsed:.3f}s")


def test_criterion_02_one_timescale_iterate():
    start = time.perf_counter()
    game = G.affine_monotone(B, b)
    tr = one_timescale_run(game, ScheduleSpec.aggressive(), np.zeros(2), 10**5, log_every=10**4)
    elapsed = time.perf_counter() - start
    target = least_norm_affine(B, b)
    d_T = float(np.linalg.norm(tr.final - target))
    d_T10 = float(np.linalg.norm(tr.points[tr.t.index(10**4)] - target))
    ok = d_T <= 0.15 and d_T <= 0.25 * d_T10 and elapsed < 10
    report(2, ok, f"dist(T)={d_T:.4f} (<=0.15), dist(T)/dist(T/10)={d_T / d_T10:.3f} (<=0.25), {elapsed:.1f}s")


@pytest.fixture(scope="module")
def bilinear_runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("crit3")
    start = time.perf_counter()
    main = run_experiment(CONFIGS / "bilinear_bandit.toml", output_dir=out / "bandit")
    ablation = run_experiment(CONFIGS / "bilinear_no_eps.toml", output_dir=out / "no_eps")
    return main, ablation, time.perf_counter() - start, out


def test_criterion_03_merely_monotone_convergence(bilinear_runs):
    main, ablation, elapsed, _ = bilinear_runs
    mu0 = np.array(load_config(CONFIGS / "bilinear_bandit.toml").init["mu0"])
    s, a = main.summary, ablation.summary
    end = float(s.median[-1])
    checks = {
        "median end <= 0.5|mu0|": end <= 0.5 * np.linalg.norm(mu0),
        "final window < initial": s.final_window["median"] < s.initial_window["median"],
        "ablation final >= 0.8 initial": a.final_window["median"] >= 0.8 * a.initial_window["median"],
        "runtime < 300s": elapsed < 300,
    }
    report(3, all(checks.values()),
           f"end median {end:.2e}, windows {s.initial_window['median']:.3g}->{s.final_window['median']:.3g}; "
           f"ablation {a.initial_window['median']:.3g}->{a.final_window['median']:.3g}; {elapsed:.0f}s; "
           + ", ".join(k for k, v in checks.items() if not v))


def test_criterion_04_strongly_monotone_sanity(tmp_path):
    start = time.perf_counter()
    res = run_experiment(CONFIGS / "cournot_bandit.toml", output_dir=tmp_path)
    elapsed = time.perf_counter() - start
    s = res.summary
    end = float(s.median[-1])
    ratio = s.final_window["median"] / s.initial_window["median"]
    ok = end <= 0.15 and ratio <= 0.5 and elapsed < 120
    report(4, ok, f"end median {end:.4f} (<=0.15), window ratio {ratio:.3f} (<=0.5), {elapsed:.0f}s")


def test_criterion_05_estimator_identity():
    start = time.perf_counter()
    game = G.cournot_duopoly()
    worst = 0.0
    for k, mu in enumerate(COURNOT_PROBES):
        m = G.evaluate_mapping(game, np.array(mu))
        for i in range(2):
            est, se = estimate_smoothed_gradient(game, i, mu, 0.3, 10**6, seed=1000 + 2 * k + i)
            worst = max(worst, abs(est[0] - m[i]) / se[0])
    elapsed = time.perf_counter() - start
    report(5, worst <= 5 and elapsed < 30, f"max |error|/stderr = {worst:.2f} (<=5), {elapsed:.1f}s")


def test_criterion_06_projection_shift_geometry():
    start = time.perf_counter()
    rows = []
    ball = lemma3_ratio_scan(Ball(np.zeros(2), 1.0), 1000, seed=0)
    rows.append(max(ball.max_ratio.values()) <= 1 + 1e-9 and ball.stable)
    for dim in (1, 2, 3):
        rep = lemma3_ratio_scan(Box(-np.ones(dim), np.ones(dim)), 1000, seed=dim)
        rows.append(max(rep.max_ratio.values()) <= np.sqrt(dim) + 1e-9 and rep.stable)
    rng = np.random.default_rng(6)
    poly_max = []
    for k in range(5):
        rep = lemma3_ratio_scan(random_polyhedron(rng), 1000, seed=k)
        rows.append(rep.stable and np.isfinite(max(rep.max_ratio.values())))
        poly_max.append(max(rep.max_ratio.values()))
    elapsed = time.perf_counter() - start
    report(6, all(rows) and elapsed < 10,
           f"ball {max(ball.max_ratio.values()):.12f}, polyhedra max {[f'{v:.3g}' for v in poly_max]}, {elapsed:.1f}s")


def test_criterion_07_concentration():
    start = time.perf_counter()
    f5 = out_of_set_frequency(Box([-1.0, -1.0], [1.0, 1.0]), (0.0, 0.0), 0.2, 10**6, seed=0)
    f3 = out_of_set_frequency(Box([-1.0], [1.0]), (0.7,), 0.1, 10**6, seed=1)
    elapsed = time.perf_counter() - start
    ok = f5 <= 1e-4 and 6.7e-4 <= f3 <= 2.7e-3 and elapsed < 10
    report(7, ok, f"freq at 5 sigma {f5:.2e} (<=1e-4), 1-D boundary {f3:.2e} in [6.7e-4, 2.7e-3], {elapsed:.2f}s")


def test_criterion_08_exponent_validator():
    start = time.perf_counter()
    ref = validate_exponents(*REFERENCE_EXPONENTS)
    margins_ok = ref.valid() and all(c.margin > 0 for c in ref.conditions.values())
    cases = {(0.4, "5/27", "1/54", "1/6"): "iii", ("5/9", "5/27", 0.2, "1/6"): "iv"}
    results = {exps: validate_exponents(*exps).violated() for exps in cases}
    exact = {exps: results[exps] == [name] for exps, name in cases.items()}
    elapsed = time.perf_counter() - start
    detail = "; ".join(f"{exps} -> violated {results[exps]} (expected only {cases[exps]})" for exps in cases)
    report(8, margins_ok and all(exact.values()) and elapsed < 1,
           f"reference margins {[round(c.margin, 4) for c in ref.conditions.values()]}; {detail}")


def _known_point_residuals():
    games = [G.bilinear_zero_sum(), G.bilinear_zero_sum([[1.0, 2.0], [-0.5, 1.0]]),
             G.matching_pennies_mixed(), G.cournot_duopoly(), G.cournot(3), G.affine_monotone(B, b)]
    out = {}
    for g in games:
        a = np.asarray(g.known_solutions.least_norm, dtype=float)
        for theta in (0.1, 1.0):
            moved = g.joint_set.project(a - theta * G.evaluate_mapping(g, a))
            out[(g.name, theta)] = float(np.linalg.norm(moved - a))
    return out


def test_criterion_09_projection_and_vi_infrastructure():
    start = time.perf_counter()
    res = _known_point_residuals()
    rng = np.random.default_rng(9)
    sets = [Box([-1.0, 0.0], [1.0, 2.0]), Ball([0.5, 0.5, 0.0], 1.0), Simplex(4), Simplex(3, 0.1),
            Polyhedron([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0]),
            random_polyhedron(rng, dim=3, n_facets=10), Free(2)]
    prop_ok = True
    for s in sets:
        x = rng.normal(size=(1000, s.dim)) * 3
        y = rng.normal(size=(1000, s.dim)) * 3
        px, py = s.project(x), s.project(y)
        prop_ok &= bool(np.all(np.linalg.norm(px - py, axis=1) <= np.linalg.norm(x - y, axis=1) + 1e-12))
        prop_ok &= bool(np.max(np.abs(s.project(px) - px)) <= 1e-12)
    elapsed = time.perf_counter() - start
    worst = max(res.values())
    report(9, worst <= 1e-9 and prop_ok and elapsed < 10,
           f"max fixed-point residual {worst:.1e} over {len(res)} checks, projection properties "
           f"{'hold' if prop_ok else 'violated'} on {len(sets)} sets, {elapsed:.1f}s")


def test_criterion_10_reproducible_summary(bilinear_runs, tmp_path):
    main, _, _, _ = bilinear_runs
    again = run_experiment(CONFIGS / "bilinear_bandit.toml", output_dir=tmp_path)
    same = main.summary_path.read_bytes() == again.summary_path.read_bytes()
    report(10, same, f"summary CSV {'byte-identical' if same else 'differs'} across two runs")


def test_supplement_single_condition_iv_perturbation():
    """A perturbation that breaks only condition iv (a4 above a2)."""
    assert validate_exponents("5/9", "5/27", "1/54", 0.19).violated() == ["iv"]


def test_supplement_bandit_ablation_orbit_moves():
    """Without regularization the mean keeps moving on the bilinear game."""
    tr = bandit_run(G.bilinear_zero_sum(), ScheduleSpec.reference(), seed=1, T=20000, log_every=1000,
                    mu0=np.array([0.9, 0.9]), eps_off=True)
    assert np.linalg.norm(tr.mu[-1]) > 0.2
