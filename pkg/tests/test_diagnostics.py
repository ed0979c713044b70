import numpy as np
import pytest
from scipy.stats import norm

from bandit_nash import games as G
from bandit_nash.diagnostics import (
    estimate_decomposition,
    estimate_smoothed_cost,
    estimate_smoothed_gradient,
    lemma3_ratio_scan,
    out_of_set_frequency,
    smoothed_cost_difference,
)
from bandit_nash.exceptions import UsageError
from bandit_nash.sets import Ball, Box, random_polyhedron
from bandit_nash.suites import SUITES, run_suite

N = 1_000_000


def within(est, se, target, k=5.0):
    return np.all(np.abs(np.asarray(est) - target) <= k * np.asarray(se))


def test_cournot_smoothed_gradient_first_coordinate():
    est, se = estimate_smoothed_gradient(G.cournot_duopoly(), 0, (0.4, 0.4), 0.3, N, seed=1)
    assert within(est, se, 0.2)


def test_constant_cost_gives_zero():
    g = G.zero_game([Box([-1.0], [1.0])] * 2)
    est, se = estimate_smoothed_gradient(g, 1, (0.1, 0.1), 0.4, 10_000, seed=0)
    np.testing.assert_array_equal(est, 0.0)


def test_bilinear_gradient_at_origin():
    for i in range(2):
        est, se = estimate_smoothed_gradient(G.bilinear_zero_sum(), i, (0.0, 0.0), 0.5, N, seed=i)
        assert within(est, se, 0.0)


def test_sample_size_guard():
    with pytest.raises(UsageError):
        estimate_smoothed_gradient(G.cournot_duopoly(), 0, (0.4, 0.4), 0.3, 10)
    with pytest.raises(UsageError):
        estimate_smoothed_gradient(G.cournot_duopoly(), 0, (0.4, 0.4), 0.0, N)


def test_quadratic_identity_at_random_interior_points():
    game = G.cournot_duopoly()
    rng = np.random.default_rng(42)
    for k, mu in enumerate(rng.uniform(0.1, 0.9, size=(10, 2))):
        d = estimate_decomposition(game, mu, 0.2, 0.0, 200_000, seed=k)
        assert d.q_norm <= 5 * np.linalg.norm(d.std_errors)


def test_smoothed_cost_consistency_cournot():
    game = G.cournot_duopoly()
    mu = np.array([0.3, 0.45])
    g, gse = estimate_smoothed_gradient(game, 0, mu, 0.3, N, seed=3)
    fd, fse = smoothed_cost_difference(game, 0, mu, 0.3, 0, 1e-2, N, seed=4)
    assert abs(g[0] - fd) <= 5 * np.hypot(gse[0], fse)
    # the two-call form with common random numbers reproduces the same difference
    e = np.array([1e-2, 0.0])
    up, _ = estimate_smoothed_cost(game, 0, mu + e, 0.3, N, seed=4)
    dn, _ = estimate_smoothed_cost(game, 0, mu - e, 0.3, N, seed=4)
    assert (up - dn) / 2e-2 == pytest.approx(fd, abs=1e-9)


def test_deep_interior_has_no_projection_term():
    d = estimate_decomposition(G.bilinear_zero_sum(), (0.0, 0.0), 1 / 6, 0.0, N, seed=0)
    assert d.p_mean_norm <= 1e-3 * d.r_std


def test_decomposition_mean_projected_into_shrunk_set():
    d = estimate_decomposition(G.bilinear_zero_sum(), (0.95, 0.0), 0.1, 0.2, 10_000, seed=0)
    np.testing.assert_allclose(d.mu, [0.8, 0.0])


def test_out_of_set_frequency_bands():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    assert out_of_set_frequency(box, (0.0, 0.0), 0.2, N, seed=0) <= 1e-4
    assert out_of_set_frequency(box, (0.0, 0.0), 0.0, N, seed=0) == 0.0
    f = out_of_set_frequency(Box([-1.0], [1.0]), (0.7,), 0.1, N, seed=1)
    assert norm.cdf(-3) / 2 <= f <= 2 * norm.cdf(-3)


def test_concentration_monotone_in_distance():
    freqs = [out_of_set_frequency(Box([-1.0], [1.0]), (0.0,), 1.0 / k, N, seed=k) for k in range(1, 6)]
    assert all(b <= a for a, b in zip(freqs, freqs[1:]))


def test_lemma3_scans():
    assert lemma3_ratio_scan(Ball(np.zeros(3), 1.0)).passed
    rep = lemma3_ratio_scan(Box(-np.ones(4), np.ones(4)))
    assert rep.passed and max(rep.max_ratio.values()) == pytest.approx(2.0, rel=1e-9)
    poly = random_polyhedron(np.random.default_rng(8), dim=2)
    assert lemma3_ratio_scan(poly, 300).passed


def test_lemma3_rejects_large_shift():
    with pytest.raises(UsageError):
        lemma3_ratio_scan(Box([0.0], [0.1]))


@pytest.mark.parametrize("name", ["lemma3", "concentration"])
def test_suites_pass(name):
    assert all(r.passed for r in run_suite(name, seed=0))


def test_schedules_suite_rows():
    rows = {r.check: r for r in run_suite("schedules")}
    assert rows["reference exponents"].passed
    assert rows["(0.4, '5/27', '1/54', '1/6') fails exactly iii"].passed


def test_unknown_suite():
    with pytest.raises(UsageError):
        run_suite("nope")
    assert set(SUITES) == {"lemma2", "decomposition", "concentration", "lemma3", "schedules"}
