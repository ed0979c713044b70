"""Payoff-based learning of Nash equilibria with Gaussian exploration.

Each player i keeps a mean ``mu_i``. Per round it draws a state
``x_i ~ N(mu_i, sigma_t^2 I)``, plays ``a_i = Proj_{A_i}(x_i)``, observes only
its own cost ``J_i(a)`` and updates::

    mu_i <- Proj_{(1 - r_t) A_i}[ mu_i - gamma_t sigma_t^2 (J_i(a) (x_i - mu_i) / sigma_t^2
                                                            + eps_t mu_i) ]

The learner never sees the game: payoffs arrive from the caller (see :func:`run`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import PoisonedStateError, UsageError
from .games import GameSpec
from .sets import MEMBER_TOL, ProductSet
from .vi import default_r_cap

_BLOCK = 4096


def mean_update(mu, x, payoff, gamma, beta, eps):
    """Pre-projection mean update for one player (or a stack of rows, one per player).

    Uses only the player's own mean, state and payoff. The estimator
    ``payoff * (x - mu) / sigma^2`` is scaled by ``beta = gamma * sigma^2``;
    the sigma^2 factors cancel and the net coefficient ``gamma * payoff`` is
    applied directly so tiny sigma cannot underflow.
    """
    payoff = np.asarray(payoff, dtype=float)
    if payoff.ndim:
        payoff = payoff[:, None]
    return mu - gamma * payoff * (x - mu) - beta * eps * mu


class BanditLearner:
    """Mutable state of the recursion: round counter, means and per-player RNG streams.

    ``eps_off`` forces eps_t = 0 (the unregularized ablation); ``r_fixed``
    replaces r_t by a constant.
    """

    def __init__(self, action_sets, schedule, seed=0, mu0=None, eps_off=False, r_fixed=None):
        self.sets = ProductSet(action_sets)
        self.n_players = self.sets.n_players
        dims = set(self.sets.dims)
        if len(dims) != 1:
            raise UsageError("all players must share the action dimension")
        self.dim = dims.pop()
        if schedule.r_cap is None:
            schedule = schedule.with_r_cap(default_r_cap(action_sets))
        self.schedule = schedule
        self.eps_off = bool(eps_off)
        self.r_fixed = r_fixed
        self.seed = seed
        streams = np.random.SeedSequence(seed).spawn(self.n_players)
        self._rngs = [np.random.default_rng(s) for s in streams]
        self._noise = None
        self._noise_pos = _BLOCK
        self.t = 1
        if mu0 is None:
            v = self._values(1)
            self.mu = self.sets.shrink(v[3]).project(np.zeros(self.sets.dim))
        else:
            mu0 = np.asarray(mu0, dtype=float)
            if mu0.shape != (self.sets.dim,):
                raise UsageError(f"mu0 must have length {self.sets.dim}")
            if not np.all(np.isfinite(mu0)):
                raise UsageError("mu0 must be finite")
            self.mu = mu0.copy()
        self.x = None
        self.a = None

    def _values(self, t):
        g, s, e, r, b = self.schedule.evaluate(t)
        if self.eps_off:
            e = 0.0
        if self.r_fixed is not None:
            r = self.r_fixed
        return g, s, e, r, g * s * s

    def _standard_normals(self):
        if self._noise_pos >= _BLOCK:
            self._noise = np.stack(
                [rng.standard_normal((_BLOCK, self.dim)) for rng in self._rngs], axis=1
            ).reshape(_BLOCK, -1)
            self._noise_pos = 0
        z = self._noise[self._noise_pos]
        self._noise_pos += 1
        return z

    def sample_states(self, sigma=None):
        """Draw x ~ N(mu, sigma_t^2 I), one independent stream per player."""
        if sigma is None:
            sigma = self._values(self.t)[1]
        self.x = self.mu + sigma * self._standard_normals()
        self.a = None
        return self.x

    def play_actions(self):
        """Project the states onto the unshrunk action sets."""
        if self.x is None:
            raise UsageError("sample_states must be called before play_actions")
        self.a = self.sets.project(self.x)
        return self.a

    def observe_and_update(self, payoffs, values=None):
        """Apply the mean update with the observed own-costs and advance t."""
        if self.x is None:
            raise UsageError("no sampled states for this round")
        payoffs = np.asarray(payoffs, dtype=float)
        if payoffs.shape != (self.n_players,):
            raise UsageError(f"expected {self.n_players} payoffs")
        if not np.all(np.isfinite(payoffs)):
            raise PoisonedStateError(f"non-finite payoff at round {self.t}: {payoffs}")
        g, s, e, r, b = self._values(self.t) if values is None else values
        d = self.dim
        mu = self.mu.reshape(self.n_players, d)
        x = self.x.reshape(self.n_players, d)
        raw = mean_update(mu, x, payoffs, g, b, e).reshape(-1)
        self.mu = self.sets.project_shrunk(raw, r)
        self.t += 1
        self.x = None
        return self

    def step(self, environment, values=None):
        """One full round; ``environment(a)`` returns the payoff vector."""
        v = self._values(self.t) if values is None else values
        self.sample_states(v[1])
        a = self.play_actions()
        self.observe_and_update(environment(a), v)
        return a


@dataclass
class RunTrace:
    algo: str
    game: str
    seed: Optional[int]
    t: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    a: list = field(default_factory=list)
    dist: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    r: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    aborted: Optional[str] = None

    def append(self, t, mu, a, target, v):
        self.t.append(int(t))
        self.mu.append(np.array(mu, dtype=float))
        self.a.append(np.array(a, dtype=float))
        self.dist.append(float(np.linalg.norm(mu - target)) if target is not None else None)
        for name, val in zip(("gamma", "sigma", "eps", "r"), v):
            getattr(self, name).append(float(val))

    def __len__(self):
        return len(self.t)


def run(game: GameSpec, schedule, seed, T, log_every=1, target=None, mu0=None,
        eps_off=False, r_fixed=None, payoff_noise=0.0, noise_seed=None):
    """Play ``T`` rounds of the bandit dynamics on ``game``.

    The environment evaluates costs at the played actions; the learner only
    receives each player's scalar cost. Row ``k`` of the trace holds ``mu``
    after ``k`` rounds and the action played in round ``k`` (row 0 shows the
    projection of ``mu0``). ``payoff_noise > 0`` adds uniform noise on
    ``[-payoff_noise, payoff_noise]`` to each observed cost (experimental).
    """
    if T < 0 or log_every < 1:
        raise UsageError("need T >= 0 and log_every >= 1")
    learner = BanditLearner(game.action_sets, schedule, seed=seed, mu0=mu0,
                            eps_off=eps_off, r_fixed=r_fixed)
    target = None if target is None else np.asarray(target, dtype=float)
    trace = RunTrace("bandit-no-eps" if eps_off else "bandit", game.name, seed,
                     metadata={"schedule": learner.schedule, "T": T, "seed": seed})
    nan4 = (np.nan,) * 4
    trace.append(0, learner.mu, learner.sets.project(learner.mu), target, nan4)
    if T == 0:
        return trace

    noise_rng = None
    if payoff_noise:
        noise_rng = np.random.default_rng(
            np.random.SeedSequence(seed if noise_seed is None else noise_seed).spawn(
                game.n_players + 1)[-1])

    def environment(a):
        p = game.payoffs(a)
        if noise_rng is not None:
            p = p + noise_rng.uniform(-payoff_noise, payoff_noise, size=p.shape)
        return p

    g, s, e, r, b = learner.schedule.evaluate_many(np.arange(1, T + 1))
    if eps_off:
        e = np.zeros_like(e)
    if r_fixed is not None:
        r = np.full_like(r, r_fixed)
    b = g * s * s
    for k in range(T):
        v = (g[k], s[k], e[k], r[k], b[k])
        try:
            a = learner.step(environment, v)
        except PoisonedStateError as exc:
            trace.aborted = str(exc)
            break
        if (k + 1) % log_every == 0 or k + 1 == T:
            trace.append(k + 1, learner.mu, a, target, v[:4])
    return trace


def feasible(trace, game, tol=MEMBER_TOL):
    """True when every logged played action lies in A."""
    sets = ProductSet(game.action_sets)
    return bool(np.all(sets.contains(np.array(trace.a), tol)))

