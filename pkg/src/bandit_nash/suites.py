"""Fixed-fixture diagnostic suites behind ``bandit-nash diagnose``.

Each suite returns :class:`CheckRow` records. Probe points and sample sizes
are fixed; only the seed varies. Statistical checks use 5-standard-error bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import games as G
from .diagnostics import (
    estimate_decomposition,
    estimate_smoothed_gradient,
    lemma3_ratio_scan,
    out_of_set_frequency,
    smoothed_cost_difference,
)
from .exceptions import UsageError
from .schedules import REFERENCE_EXPONENTS, ScheduleSpec, validate_exponents
from .sets import Ball, Box, random_polyhedron

N_SAMPLES = 1_000_000
BAND = 5.0

COURNOT_PROBES = (
    (0.4, 0.4), (0.2, 0.3), (0.7, 0.1), (0.5, 0.5), (0.15, 0.8),
    (0.9, 0.6), (0.33, 0.33), (0.6, 0.25), (0.1, 0.1), (0.8, 0.85),
)


@dataclass
class CheckRow:
    suite: str
    check: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""


def _cubic_game():
    box = Box([-1.0], [1.0])

    def c0(a):
        return a[..., 0] ** 3 / 3 + a[..., 0] * a[..., 1]

    def c1(a):
        return a[..., 1] ** 3 / 3 - a[..., 0] * a[..., 1]

    def mapping(a):
        return np.stack([a[..., 0] ** 2 + a[..., 1], a[..., 1] ** 2 - a[..., 0]], axis=-1)

    return G.custom([c0, c1], [box, box], mapping=mapping, name="cubic", vectorized=True)


def suite_lemma2(seed):
    rows = []
    game = G.cournot_duopoly()
    for k, mu in enumerate(COURNOT_PROBES):
        m = G.evaluate_mapping(game, np.array(mu))
        for i in range(2):
            est, se = estimate_smoothed_gradient(game, i, mu, 0.3, N_SAMPLES, seed + 100 * k + i)
            z = abs(est[0] - m[i]) / se[0]
            rows.append(CheckRow("lemma2", f"cournot mu={mu} coord {i}", z, BAND, z <= BAND,
                                 "standard errors from analytic mapping"))
    zero = G.zero_game([Box([-1.0], [1.0])] * 2)
    est, se = estimate_smoothed_gradient(zero, 0, (0.2, -0.3), 0.3, N_SAMPLES, seed)
    z = float(np.max(np.abs(est) / np.maximum(se, 1e-300))) if np.any(se > 0) else float(np.max(np.abs(est)))
    rows.append(CheckRow("lemma2", "constant cost -> 0", z, BAND, z <= BAND))
    bil = G.bilinear_zero_sum()
    for i in range(2):
        est, se = estimate_smoothed_gradient(bil, i, (0.0, 0.0), 0.5, N_SAMPLES, seed + 7 + i)
        z = abs(est[0]) / se[0]
        rows.append(CheckRow("lemma2", f"bilinear mu=0 coord {i}", z, BAND, z <= BAND))
    mu = (0.3, 0.45)
    for i in range(2):
        g, gse = estimate_smoothed_gradient(game, i, mu, 0.3, N_SAMPLES, seed + 11)
        fd, fse = smoothed_cost_difference(game, i, mu, 0.3, i, 1e-2, N_SAMPLES, seed + 12)
        tol = BAND * np.hypot(gse[0], fse) + 1e-6
        rows.append(CheckRow("lemma2", f"smoothed-cost finite difference coord {i}",
                             abs(g[0] - fd), tol, abs(g[0] - fd) <= tol))
    return rows


def suite_decomposition(seed):
    rows = []
    cournot = G.cournot_duopoly()
    d = estimate_decomposition(cournot, (0.4, 0.4), 0.1, 0.0, N_SAMPLES, seed)
    tol = BAND * float(np.linalg.norm(d.std_errors))
    rows.append(CheckRow("decomposition", "quadratic game q_norm", d.q_norm, tol, d.q_norm <= tol))

    bil = G.bilinear_zero_sum()
    d = estimate_decomposition(bil, (0.0, 0.0), 1 / 6, 0.0, N_SAMPLES, seed + 1)
    rows.append(CheckRow("decomposition", "deep interior p_mean_norm (6 sigma)", d.p_mean_norm,
                         1e-3 * d.r_std, d.p_mean_norm <= 1e-3 * d.r_std))

    big = estimate_decomposition(bil, (0.5, 0.5), 0.2, 0.0, N_SAMPLES, seed + 2)
    small = estimate_decomposition(bil, (0.5, 0.5), 0.1, 0.0, N_SAMPLES, seed + 3)
    ratio = small.r_std / big.r_std
    rows.append(CheckRow("decomposition", "r_std ratio when sigma halves", ratio, 2.5,
                         1.5 <= ratio <= 2.5, "band [1.5, 2.5]"))

    cubic = _cubic_game()
    q1 = estimate_decomposition(cubic, (0.5, 0.5), 0.4, 0.0, N_SAMPLES, seed + 4)
    q2 = estimate_decomposition(cubic, (0.5, 0.5), 0.2, 0.0, N_SAMPLES, seed + 5)
    tol = 0.75 * q1.q_norm + BAND * float(np.linalg.norm(q2.std_errors))
    rows.append(CheckRow("decomposition", "cubic game q_norm at sigma/2", q2.q_norm, tol, q2.q_norm <= tol,
                         f"q_norm at sigma = {q1.q_norm:.6g}"))

    sched = ScheduleSpec.reference().with_r_cap(0.5)
    prev = None
    for t in (100, 1000, 10000):
        v = sched.evaluate(t)
        d = estimate_decomposition(bil, (0.0, 0.0), v.sigma, v.r, N_SAMPLES, seed + t)
        if prev is not None:
            rows.append(CheckRow("decomposition", f"p_mean_norm decay to t={t}", d.p_mean_norm,
                                 0.1 * prev, d.p_mean_norm <= 0.1 * prev))
        prev = d.p_mean_norm
    return rows


def suite_concentration(seed):
    rows = []
    box2 = Box([-1.0, -1.0], [1.0, 1.0])
    f = out_of_set_frequency(box2, (0.0, 0.0), 0.2, N_SAMPLES, seed)
    rows.append(CheckRow("concentration", "Box dist/sigma = 5", f, 1e-4, f <= 1e-4))
    f0 = out_of_set_frequency(box2, (0.0, 0.0), 0.0, N_SAMPLES, seed)
    rows.append(CheckRow("concentration", "sigma = 0", f0, 0.0, f0 == 0.0))
    box1 = Box([-1.0], [1.0])
    r, sigma = 0.3, 0.1
    f = out_of_set_frequency(box1, (1.0 - r,), sigma, N_SAMPLES, seed + 1)
    lo, hi = norm.cdf(-3) / 2, 2 * norm.cdf(-3)
    rows.append(CheckRow("concentration", "1-D shrunk boundary r/sigma = 3", f, hi, lo <= f <= hi,
                         f"band [{lo:.3g}, {hi:.3g}]"))
    freqs = [out_of_set_frequency(box1, (0.0,), 1.0 / k, N_SAMPLES, seed + 10 + k) for k in range(1, 6)]
    mono = all(b <= a for a, b in zip(freqs, freqs[1:]))
    rows.append(CheckRow("concentration", "non-increasing over dist/sigma 1..5", freqs[-1], freqs[0], mono))
    return rows


def suite_lemma3(seed):
    rows = []
    rep = lemma3_ratio_scan(Ball(np.zeros(2), 1.0), 1000, seed=seed)
    m = max(rep.max_ratio.values())
    rows.append(CheckRow("lemma3", "Ball", m, 1 + 1e-9, rep.passed))
    for dim in (1, 2, 3):
        rep = lemma3_ratio_scan(Box(-np.ones(dim), np.ones(dim)), 1000, seed=seed)
        m = max(rep.max_ratio.values())
        rows.append(CheckRow("lemma3", f"Box dim {dim}", m, np.sqrt(dim) + 1e-9, rep.passed))
    rng = np.random.default_rng(seed)
    for k in range(5):
        poly = random_polyhedron(rng)
        rep = lemma3_ratio_scan(poly, 1000, seed=seed + k)
        m = max(rep.max_ratio.values())
        rows.append(CheckRow("lemma3", f"random polyhedron {k} bounded and stable", m, float("inf"),
                             rep.passed, " ".join(f"{d:g}:{v:.6g}" for d, v in rep.max_ratio.items())))
    return rows


SCHEDULE_PERTURBATIONS = (
    ((0.4, "5/27", "1/54", "1/6"), "iii"),
    (("5/9", "5/27", 0.2, "1/6"), "iv"),
    (("5/9", "5/27", "1/54", 0.19), "iv"),
)


def suite_schedules(seed):
    rep = validate_exponents(*REFERENCE_EXPONENTS)
    rows = [CheckRow("schedules", "reference exponents", min(c.margin for c in rep.conditions.values()),
                     0.0, rep.valid())]
    for exps, name in SCHEDULE_PERTURBATIONS:
        r = validate_exponents(*exps)
        bad = r.violated()
        rows.append(CheckRow("schedules", f"{exps} fails exactly {name}", len(bad), 1,
                             bad == [name], "violated: " + ",".join(bad)))
    return rows


SUITES = {
    "lemma2": suite_lemma2,
    "decomposition": suite_decomposition,
    "concentration": suite_concentration,
    "lemma3": suite_lemma3,
    "schedules": suite_schedules,
}


def run_suite(name, seed=0):
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    return SUITES[name](int(seed))
