"""Monte-Carlo checks of the building blocks behind the bandit update.

The one-point estimator of player i at mean ``mu`` is
``F_i = J_i(x) (x_i - mu_i) / sigma^2`` with ``x ~ N(mu, sigma^2 I)``. Its
mean is the gradient of the Gaussian-smoothed cost. The update splits into
the true mapping ``M``, the smoothing bias ``Q = E F - M``, the zero-mean
fluctuation ``R = F - E F`` and the term
``P_i = (x_i - mu_i) / sigma^2 (J_i(a) - J_i(x))`` caused by playing the
projected action ``a = Proj_A(x)`` instead of ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import UsageError
from .games import evaluate_cost, evaluate_mapping
from .sets import ProductSet

CHUNK = 200_000


def _chunks(n, chunk=CHUNK):
    done = 0
    while done < n:
        m = min(chunk, n - done)
        yield m
        done += m


class _Moments:
    def __init__(self, dim):
        self.n = 0
        self.s1 = np.zeros(dim)
        self.s2 = np.zeros(dim)

    def add(self, v):
        self.n += v.shape[0]
        self.s1 += v.sum(axis=0)
        self.s2 += (v * v).sum(axis=0)

    @property
    def mean(self):
        return self.s1 / self.n

    @property
    def std(self):
        var = np.maximum(self.s2 / self.n - self.mean**2, 0.0) * self.n / max(self.n - 1, 1)
        return np.sqrt(var)

    @property
    def stderr(self):
        return self.std / np.sqrt(self.n)


def estimate_smoothed_gradient(game, i, mu, sigma, n=1_000_000, seed=0):
    """Monte-Carlo mean of the one-point estimator for player ``i`` and its standard errors."""
    if not sigma > 0:
        raise UsageError("sigma must be positive")
    if n < 1000:
        raise UsageError("n must be at least 1000")
    mu = np.asarray(mu, dtype=float)
    sl = game.player_slice(i)
    rng = np.random.default_rng(seed)
    mom = _Moments(game.dim_per_player)
    for m in _chunks(n):
        z = rng.standard_normal((m, game.joint_dim))
        J = evaluate_cost(game, i, mu + sigma * z)
        mom.add(J[:, None] * z[:, sl] / sigma)
    return mom.mean, mom.stderr


def estimate_smoothed_cost(game, i, mu, sigma, n=1_000_000, seed=0):
    """Monte-Carlo estimate of the mixed-strategy cost E J_i(x), x ~ N(mu, sigma^2 I).

    With a fixed ``seed`` the same normal draws are reused for every ``mu``
    (common random numbers), so differences across ``mu`` have low variance.
    """
    mu = np.asarray(mu, dtype=float)
    rng = np.random.default_rng(seed)
    mom = _Moments(1)
    for m in _chunks(n):
        z = rng.standard_normal((m, game.joint_dim))
        mom.add(np.asarray(evaluate_cost(game, i, mu + sigma * z))[:, None])
    return float(mom.mean[0]), float(mom.stderr[0])


def smoothed_cost_difference(game, i, mu, sigma, coord, h=1e-2, n=1_000_000, seed=0):
    """Central difference of the smoothed cost along joint coordinate ``coord``.

    Both evaluations share every normal draw, so the standard error returned
    is that of the per-draw difference, far below the two separate errors.
    """
    mu = np.asarray(mu, dtype=float)
    e = np.zeros_like(mu)
    e[coord] = h
    rng = np.random.default_rng(seed)
    mom = _Moments(1)
    for m in _chunks(n):
        x = mu + sigma * rng.standard_normal((m, game.joint_dim))
        d = (evaluate_cost(game, i, x + e) - evaluate_cost(game, i, x - e)) / (2 * h)
        mom.add(np.asarray(d)[:, None])
    return float(mom.mean[0]), float(mom.stderr[0])


@dataclass
class DecompositionEstimate:
    mu: np.ndarray
    m_true: np.ndarray
    m_smoothed: np.ndarray
    q_norm: float
    r_std: float
    p_mean_norm: float
    n_samples: int
    std_errors: np.ndarray
    r_std_per_coord: np.ndarray


def estimate_decomposition(game, mu, sigma, shrink_r=0.0, n=1_000_000, seed=0):
    """Estimate the M / Q / R / P terms at ``mu``.

    ``mu`` is first projected onto ``shrink(A, shrink_r)``, where the learner's
    means live. ``r_std`` is the largest per-coordinate standard deviation of
    the estimator (the scale of the R term).
    """
    if game.mapping is None:
        raise UsageError("decomposition needs an analytic game mapping")
    if n < 1000:
        raise UsageError("n must be at least 1000")
    sets = ProductSet(game.action_sets)
    mu = sets.shrink(shrink_r).project(np.asarray(mu, dtype=float))
    rng = np.random.default_rng(seed)
    F_mom = _Moments(game.joint_dim)
    p_sum = 0.0
    for m in _chunks(n):
        z = rng.standard_normal((m, game.joint_dim))
        x = mu + sigma * z
        a = sets.project(x)
        F = np.empty_like(z)
        P = np.empty_like(z)
        for i in range(game.n_players):
            sl = game.player_slice(i)
            Jx = evaluate_cost(game, i, x)
            Ja = evaluate_cost(game, i, a)
            F[:, sl] = Jx[:, None] * z[:, sl] / sigma
            P[:, sl] = (Ja - Jx)[:, None] * z[:, sl] / sigma
        F_mom.add(F)
        p_sum += float(np.linalg.norm(P, axis=1).sum())
    m_true = evaluate_mapping(game, mu)
    r_std = F_mom.std
    return DecompositionEstimate(
        mu=mu, m_true=m_true, m_smoothed=F_mom.mean,
        q_norm=float(np.linalg.norm(F_mom.mean - m_true)), r_std=float(r_std.max()),
        p_mean_norm=p_sum / n, n_samples=n, std_errors=F_mom.stderr, r_std_per_coord=r_std,
    )


def out_of_set_frequency(convex_set, mu, sigma, n=1_000_000, seed=0):
    """Fraction of draws from N(mu, sigma^2 I) that land outside ``convex_set``."""
    mu = np.asarray(mu, dtype=float)
    if sigma == 0:
        return 0.0 if bool(convex_set.contains(mu)) else 1.0
    rng = np.random.default_rng(seed)
    outside = 0
    for m in _chunks(n):
        x = mu + sigma * rng.standard_normal((m, mu.size))
        outside += int(np.count_nonzero(~convex_set.contains(x, tol=0.0)))
    return outside / n


@dataclass
class Lemma3Report:
    deltas: tuple
    max_ratio: dict
    bound: float | None
    within_bound: bool
    stable: bool

    @property
    def passed(self):
        return self.within_bound and self.stable


def lemma3_ratio_scan(convex_set, n_points=1000, deltas=(1e-1, 1e-2, 1e-3), seed=0,
                      base_r=None, spread=2.0, growth_tol=1e-6):
    """Max over sampled points of ||P_{A_{r+d}} x - P_{A_r} x|| / d for each shift ``d``.

    Points are drawn uniformly from the set's bounding box enlarged ``spread``
    times about its center. ``stable`` means the maximum does not grow (beyond
    ``growth_tol`` relative) as ``d`` shrinks. ``within_bound`` compares
    against the set's known constant (sqrt(dim) for boxes, 1 for balls) with
    slack 1e-9, and is vacuous when no constant is known.
    """
    rad = convex_set.inradius()
    if base_r is None:
        base_r = min(0.05, rad / 10) if np.isfinite(rad) else 0.05
    if base_r + max(deltas) >= rad / 2:
        raise UsageError("shrink radii must stay below inradius / 2")
    lo, hi = convex_set.bounding_box()
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * spread
    rng = np.random.default_rng(seed)
    pts = rng.uniform(center - half, center + half, size=(n_points, convex_set.dim))
    base = convex_set.shrink(base_r).project(pts)
    ratios = {}
    for d in deltas:
        moved = convex_set.shrink(base_r + d).project(pts)
        ratios[d] = float(np.max(np.linalg.norm(moved - base, axis=1)) / d)
    bound = convex_set.lemma3_constant()
    within = True if bound is None else all(v <= bound + 1e-9 for v in ratios.values())
    ordered = sorted(deltas, reverse=True)
    stable = all(
        ratios[small] <= ratios[big] * (1 + growth_tol) + 1e-12
        for big, small in zip(ordered, ordered[1:])
    )
    return Lemma3Report(tuple(deltas), ratios, bound, within, stable)
