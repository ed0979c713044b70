"""Deterministic reference solvers for monotone variational inequalities.

VI(Y, F): find y in Y with (F(y), z - y) >= 0 for all z in Y. Equivalently
``y = Proj_Y(y - theta F(y))`` for any theta > 0, which gives the residual
used throughout: ``||y - Proj_Y(y - F(y))||``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NoSolutionError, NumericalDivergenceError, UsageError
from .games import evaluate_mapping, lipschitz_of
from .schedules import validate_schedule
from .sets import ProductSet


@dataclass
class VISolution:
    point: np.ndarray
    residual: float
    iterations: int
    converged: bool


@dataclass
class TikhonovPathPoint:
    t: int
    y: np.ndarray
    eps: float
    r: float
    residual: float


def natural_residual(F, proj, x, theta=1.0):
    return float(np.linalg.norm(x - proj(x - theta * F(x))))


def _fd_jacobian(G, x, g0):
    n = x.size
    J = np.empty((n, n))
    for k in range(n):
        h = 1e-7 * max(1.0, abs(x[k]))
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (G(x + e) - G(x - e)) / (2 * h)
    return J


def solve_strongly_monotone_vi(mapping, joint_set, modulus, lipschitz, tol=1e-10,
                               x0=None, max_iter=1_000_000):
    """Solve VI(joint_set, mapping) for a strongly monotone, Lipschitz mapping.

    Projected fixed-point steps ``x <- P(x - theta F(x))`` with
    ``theta = modulus / lipschitz**2`` (a contraction) are interleaved with
    semismooth Newton steps on the natural map ``G(x) = x - P(x - F(x))``;
    a Newton step is kept only when it decreases ``||G||``.
    """
    if not modulus > 0 or not lipschitz > 0:
        raise UsageError("modulus and lipschitz must be positive")
    proj = joint_set.project if hasattr(joint_set, "project") else joint_set
    F = mapping
    theta = modulus / lipschitz**2

    def G(x):
        return x - proj(x - F(x))

    x = proj(np.zeros(joint_set.dim) if x0 is None else np.asarray(x0, dtype=float))
    g = G(x)
    res = float(np.linalg.norm(g))
    best_x, best_res = x, res
    it = 0
    while res > tol and it < max_iter:
        # Newton attempt
        J = _fd_jacobian(G, x, g)
        step, *_ = np.linalg.lstsq(J, -g, rcond=None)
        accepted = False
        alpha = 1.0
        for _ in range(20):
            cand = proj(x + alpha * step)
            gc = G(cand)
            rc = float(np.linalg.norm(gc))
            if rc <= (1 - 1e-4 * alpha) * res:
                x, g, res = cand, gc, rc
                accepted = True
                break
            alpha *= 0.5
        it += 1
        if not accepted:
            for _ in range(50):
                x = proj(x - theta * F(x))
                it += 1
            g = G(x)
            res = float(np.linalg.norm(g))
        if not np.all(np.isfinite(x)):
            break
        if res < best_res:
            best_x, best_res = x, res
    return VISolution(best_x, best_res, it, best_res <= tol)


def _joint_shrunk(game, r):
    return ProductSet(game.action_sets).shrink(r)


def regularized_solution(game, eps, r=0.0, tol=None, x0=None):
    """Unique solution of VI(shrink(A, r), M + eps I)."""
    if not eps > 0:
        raise UsageError("eps must be positive")
    tol = min(1e-8, eps * 1e-4) if tol is None else tol
    Y = _joint_shrunk(game, r)
    L = lipschitz_of(game) + eps
    modulus = eps + (game.modulus if game.monotonicity == "strongly_monotone" else 0.0)

    def F(y):
        return evaluate_mapping(game, y) + eps * y

    return solve_strongly_monotone_vi(F, Y, modulus, L, tol=tol, x0=x0)


def tikhonov_path(game, schedule, t_values, tol=None):
    """Regularized solutions y(t) at (eps_t, r_t), warm-started along ``t_values``."""
    if schedule.r_cap is None:
        schedule = schedule.with_r_cap(default_r_cap(game.action_sets))
    out = []
    prev = None
    for t in t_values:
        v = schedule.evaluate(int(t))
        sol = regularized_solution(game, v.eps, v.r, tol=tol, x0=prev)
        prev = sol.point
        out.append(TikhonovPathPoint(int(t), sol.point, v.eps, v.r, sol.residual))
    return out


def default_r_cap(action_sets):
    """Half the smallest inradius; ``None`` when every set is unbounded."""
    rad = min(s.inradius() for s in action_sets)
    return None if not np.isfinite(rad) else rad / 2.0


@dataclass
class IterateTrace:
    t: list = field(default_factory=list)
    points: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    r: list = field(default_factory=list)

    def append(self, t, z, v):
        self.t.append(int(t))
        self.points.append(np.array(z, dtype=float))
        for name in ("gamma", "sigma", "eps", "r"):
            getattr(self, name).append(float(v[name]))

    @property
    def final(self):
        return self.points[-1]


def one_timescale_run(game, schedule, z0, T, log_every=1, check_schedule=True):
    """Iterate z(t+1) = Proj_{shrink(A, r_t)}[z(t) - beta_t (M(z(t)) + eps_t z(t))].

    Row ``k`` of the returned trace holds the iterate after ``k`` steps.
    """
    if T < 0 or log_every < 1:
        raise UsageError("need T >= 0 and log_every >= 1")
    sets = ProductSet(game.action_sets)
    if schedule.r_cap is None:
        schedule = schedule.with_r_cap(default_r_cap(game.action_sets))
    if check_schedule:
        validate_schedule(schedule, mode="deterministic", free_sets=sets.all_free)
    z = np.asarray(z0, dtype=float).copy()
    if z.shape != (game.joint_dim,) or not np.all(np.isfinite(z)):
        raise UsageError("z0 must be a finite joint point")
    trace = IterateTrace()
    nan_row = {"gamma": np.nan, "sigma": np.nan, "eps": np.nan, "r": np.nan}
    trace.append(0, z, nan_row)
    if T == 0:
        return trace
    g, s, e, r, b = schedule.evaluate_many(np.arange(1, T + 1))
    for k in range(T):
        z = sets.project_shrunk(z - b[k] * (evaluate_mapping(game, z) + e[k] * z), r[k])
        if not np.all(np.isfinite(z)):
            raise NumericalDivergenceError(f"iterate overflowed at step {k + 1}", trace)
        if (k + 1) % log_every == 0 or k + 1 == T:
            trace.append(k + 1, z, {"gamma": g[k], "sigma": s[k], "eps": e[k], "r": r[k]})
    return trace


def least_norm_affine(B, b, tol=1e-9):
    """Minimum-norm solution of ``B x + b = 0`` via the SVD."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    U, sv, Vt = np.linalg.svd(B)
    cutoff = 1e-12 * (sv[0] if sv.size and sv[0] > 0 else 1.0)
    rank = int(np.sum(sv > cutoff))
    rhs = U.T @ (-b)
    x = Vt[:rank].T @ (rhs[:rank] / sv[:rank])
    if np.linalg.norm(B @ x + b) > tol * (1.0 + np.linalg.norm(b)):
        raise NoSolutionError("B x + b = 0 is inconsistent")
    return x + 0.0
