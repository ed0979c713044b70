"""Game catalog: cost oracles, game mappings and known equilibria.

Costs are defined on all of R^(N*d) and accept batches: ``cost(i, a)`` with
``a`` of shape ``(..., N*d)`` returns an array of shape ``(...)``. The game
mapping stacks each player's gradient of its own cost with respect to its own
action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import NotMonotoneError, UsageError
from .sets import Box, ConvexSet, Free, ProductSet, Simplex

FD_STEP = 1e-6
MONOTONE_VIOLATION_TOL = 1e-8


@dataclass(frozen=True)
class KnownSolutions:
    """Analytic description of the equilibrium set.

    ``kind`` is ``"point"``, ``"affine"`` (``offset + span(basis)``) or ``"none"``.
    For affine sets ``offset`` is the least-norm element.
    """

    kind: str = "none"
    point: Optional[np.ndarray] = None
    basis: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None

    @property
    def least_norm(self):
        if self.kind == "point":
            return self.point
        if self.kind == "affine":
            return self.offset
        return None


@dataclass(frozen=True, eq=False)
class GameSpec:
    name: str
    n_players: int
    dim_per_player: int
    action_sets: tuple
    cost: Callable
    mapping: Optional[Callable] = None
    monotonicity: str = "unknown"
    modulus: float = 0.0
    known_solutions: KnownSolutions = field(default_factory=KnownSolutions)
    lipschitz: Optional[float] = None
    cost_growth: str = "unknown"
    vectorized: bool = True
    all_costs: Optional[Callable] = None

    def __post_init__(self):
        sets = tuple(self.action_sets)
        if len(sets) != self.n_players:
            raise UsageError("one action set per player required")
        if any(s.dim != self.dim_per_player for s in sets):
            raise UsageError("action set dimension must equal dim_per_player")
        object.__setattr__(self, "action_sets", sets)

    @property
    def joint_dim(self):
        return self.n_players * self.dim_per_player

    @property
    def joint_set(self):
        return ProductSet(self.action_sets)

    def player_slice(self, i):
        d = self.dim_per_player
        return slice(i * d, (i + 1) * d)

    def payoffs(self, a):
        """Costs of all players at joint action ``a`` (single point)."""
        if self.all_costs is not None:
            return np.asarray(self.all_costs(a), dtype=float)
        return np.array([self.cost(i, a) for i in range(self.n_players)], dtype=float)


def split_players(a, n_players, dim):
    """View a joint point (or a batch) as ``(..., N, d)``; round-trips via ``stack_players``."""
    a = np.asarray(a, dtype=float)
    return a.reshape(a.shape[:-1] + (n_players, dim))


def stack_players(blocks):
    blocks = np.asarray(blocks, dtype=float)
    return blocks.reshape(blocks.shape[:-2] + (-1,))


def _check_point(game, a):
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != game.joint_dim:
        raise UsageError(f"joint point must have length {game.joint_dim}, got {a.shape[-1]}")
    return a


def evaluate_cost(game, i, a):
    """J_i(a). This is the only game information a bandit player may see."""
    if not 0 <= i < game.n_players:
        raise UsageError(f"player index {i} out of range")
    a = _check_point(game, a)
    if game.vectorized or a.ndim == 1:
        out = game.cost(i, a)
    else:
        flat = a.reshape(-1, a.shape[-1])
        out = np.array([game.cost(i, row) for row in flat]).reshape(a.shape[:-1])
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def _fd_mapping(game, a, step=FD_STEP):
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    for i in range(game.n_players):
        for k in range(game.dim_per_player):
            idx = i * game.dim_per_player + k
            e = np.zeros(a.shape[-1])
            e[idx] = step
            out[..., idx] = (evaluate_cost(game, i, a + e) - evaluate_cost(game, i, a - e)) / (2 * step)
    return out


def evaluate_mapping(game, a):
    """Stacked own-gradients; central differences when no analytic mapping exists."""
    a = _check_point(game, a)
    if game.mapping is not None:
        return np.asarray(game.mapping(a), dtype=float)
    return _fd_mapping(game, a)


@dataclass(frozen=True)
class MonotonicityReport:
    min_inner_product: float
    violated: bool
    n_pairs: int


def check_monotone_sampled(game, joint_set=None, n_pairs=10_000, seed=0):
    """Smallest sampled value of (M(x) - M(y), x - y) over random pairs of the joint set."""
    if n_pairs < 1:
        raise UsageError("n_pairs must be >= 1")
    joint_set = game.joint_set if joint_set is None else joint_set
    if not isinstance(joint_set, ProductSet):
        joint_set = ProductSet(joint_set) if isinstance(joint_set, (list, tuple)) else ProductSet([joint_set])
    rng = np.random.default_rng(seed)
    x = joint_set.sample(rng, n_pairs)
    y = joint_set.sample(rng, n_pairs)
    ip = np.einsum("ij,ij->i", evaluate_mapping(game, x) - evaluate_mapping(game, y), x - y)
    m = float(ip.min())
    return MonotonicityReport(m, m < -MONOTONE_VIOLATION_TOL, n_pairs)


def estimate_lipschitz(game, n_pairs=1000, seed=0, safety=1.5):
    """Sampled max ||M(x) - M(y)|| / ||x - y|| over the joint bounding box, times ``safety``."""
    lo, hi = game.joint_set.bounding_box()
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, size=(n_pairs, game.joint_dim))
    y = rng.uniform(lo, hi, size=(n_pairs, game.joint_dim))
    num = np.linalg.norm(evaluate_mapping(game, x) - evaluate_mapping(game, y), axis=1)
    den = np.linalg.norm(x - y, axis=1)
    ok = den > 0
    return safety * float(np.max(num[ok] / den[ok]))


def lipschitz_of(game):
    return game.lipschitz if game.lipschitz is not None else estimate_lipschitz(game)


# ---------------------------------------------------------------------------
# catalog


def bilinear_zero_sum(C=((1.0,),), action_sets=None, name="bilinear_zero_sum"):
    """J_1 = a1' C a2, J_2 = -J_1. Default action sets are [-1, 1]^d boxes."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    d = C.shape[0]
    if C.shape != (d, d):
        raise UsageError("C must be square")
    if action_sets is None:
        action_sets = [Box(-np.ones(d), np.ones(d))] * 2

    def value(a):
        return np.einsum("...i,ij,...j->...", a[..., :d], C, a[..., d:])

    def cost(i, a):
        v = value(a)
        return v if i == 0 else -v

    def mapping(a):
        return np.concatenate([a[..., d:] @ C.T, -(a[..., :d] @ C)], axis=-1)

    def all_costs(a):
        v = float(a[:d] @ C @ a[d:])
        return np.array([v, -v])

    known = KnownSolutions()
    origin_inside = all(s.contains(np.zeros(d)) for s in action_sets)
    if origin_inside and abs(np.linalg.det(C)) > 1e-12:
        known = KnownSolutions("point", np.zeros(2 * d))
    return GameSpec(
        name=name, n_players=2, dim_per_player=d, action_sets=action_sets,
        cost=cost, mapping=mapping, monotonicity="monotone", known_solutions=known,
        lipschitz=float(np.linalg.norm(C, 2)), cost_growth="quadratic", all_costs=all_costs,
    )


MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


def matching_pennies_mixed():
    """Mixed extension of matching pennies on two 2-simplexes: J_1 = p'Uq, J_2 = -J_1."""
    U = MATCHING_PENNIES
    game = bilinear_zero_sum(U, action_sets=[Simplex(2), Simplex(2)], name="matching_pennies_mixed")
    return GameSpec(
        name=game.name, n_players=2, dim_per_player=2, action_sets=game.action_sets,
        cost=game.cost, mapping=game.mapping, monotonicity="monotone",
        known_solutions=KnownSolutions("point", np.full(4, 0.5)),
        lipschitz=game.lipschitz, cost_growth="quadratic", all_costs=game.all_costs,
    )


def cournot(n_players=2, intercept=1.0, slope=1.0, name=None):
    """Cournot oligopoly with inverse demand ``intercept - slope * sum(a)`` and zero cost.

    J_i(a) = -a_i (intercept - slope * sum(a)), A_i = [0, 1]. The mapping
    ``slope * (I + 11') a - intercept`` is strongly monotone with modulus ``slope``.
    """
    n = int(n_players)
    if n < 1:
        raise UsageError("need at least one player")

    def cost(i, a):
        return -a[..., i] * (intercept - slope * a.sum(axis=-1))

    def mapping(a):
        return -(intercept - slope * a.sum(axis=-1, keepdims=True) - slope * a)

    def all_costs(a):
        return -a * (intercept - slope * a.sum())

    ne = np.full(n, intercept / (slope * (n + 1)))
    inside = np.all((ne >= 0) & (ne <= 1))
    return GameSpec(
        name=name or ("cournot_duopoly" if n == 2 else f"cournot_{n}"),
        n_players=n, dim_per_player=1, action_sets=[Box([0.0], [1.0])] * n,
        cost=cost, mapping=mapping, monotonicity="strongly_monotone", modulus=slope,
        known_solutions=KnownSolutions("point", ne) if inside else KnownSolutions(),
        lipschitz=slope * (n + 1), cost_growth="quadratic", all_costs=all_costs,
    )


def cournot_duopoly():
    return cournot(2)


def affine_monotone(B, b, action_sets=None, dim_per_player=1, check_psd=True, name="affine_monotone"):
    """Game with mapping ``M(a) = B a + b``.

    Player i's cost is ``0.5 a_i' B_ii a_i + a_i' (sum_{j != i} B_ij a_j + b_i)``,
    so own-blocks ``B_ii`` must be symmetric. Default action sets are Free.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n_total = b.size
    d = int(dim_per_player)
    if B.shape != (n_total, n_total) or n_total % d:
        raise UsageError("B must be square with size matching b and a multiple of dim_per_player")
    n = n_total // d
    for i in range(n):
        blk = B[i * d:(i + 1) * d, i * d:(i + 1) * d]
        if not np.allclose(blk, blk.T):
            raise UsageError("own-action blocks of B must be symmetric")
    sym_min = float(np.linalg.eigvalsh(0.5 * (B + B.T)).min())
    if check_psd and sym_min < -1e-10:
        raise NotMonotoneError(f"B + B' has min eigenvalue {2 * sym_min:.3g} < 0")
    if action_sets is None:
        action_sets = [Free(d)] * n

    def cost(i, a):
        sl = slice(i * d, (i + 1) * d)
        ai = a[..., sl]
        own = B[sl, sl]
        rest = a @ B[sl].T - ai @ own.T
        return 0.5 * np.einsum("...i,ij,...j->...", ai, own, ai) + np.einsum("...i,...i->...", ai, rest + b[sl])

    def mapping(a):
        return a @ B.T + b

    if sym_min > 1e-10:
        tag, modulus = "strongly_monotone", sym_min
    elif sym_min >= -1e-10:
        tag, modulus = "monotone", 0.0
    else:
        tag, modulus = "unknown", 0.0

    known = KnownSolutions()
    if all(isinstance(s, Free) for s in action_sets) and tag != "unknown":
        sol, *_ = np.linalg.lstsq(B, -b, rcond=None)
        if np.linalg.norm(B @ sol + b) <= 1e-9 * (1 + np.linalg.norm(b)):
            _, sv, vt = np.linalg.svd(B)
            rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0] if sv.size else 1.0)))
            basis = vt[rank:].T
            known = (KnownSolutions("point", sol) if basis.shape[1] == 0
                     else KnownSolutions("affine", basis=basis, offset=sol))
    return GameSpec(
        name=name, n_players=n, dim_per_player=d, action_sets=action_sets,
        cost=cost, mapping=mapping, monotonicity=tag, modulus=modulus,
        known_solutions=known, lipschitz=float(np.linalg.norm(B, 2)) or 1.0,
        cost_growth="quadratic",
    )


def zero_game(action_sets, name="zero"):
    """Constant (zero) costs; the mapping vanishes and the least-norm NE is Proj_A(0)."""
    sets = list(action_sets)
    d = sets[0].dim
    n = len(sets)

    def cost(i, a):
        return np.zeros(np.shape(a)[:-1]) if np.ndim(a) > 1 else 0.0

    def mapping(a):
        return np.zeros_like(np.asarray(a, dtype=float))

    point = ProductSet(sets).project(np.zeros(n * d))
    return GameSpec(
        name=name, n_players=n, dim_per_player=d, action_sets=sets, cost=cost,
        mapping=mapping, monotonicity="monotone", known_solutions=KnownSolutions("point", point),
        lipschitz=1.0, cost_growth="constant",
    )


def custom(costs, action_sets, mapping=None, name="custom", monotonicity="unknown",
           modulus=0.0, lipschitz=None, vectorized=False, cost_growth="declared-unknown",
           known_solutions=None):
    """Wrap user cost closures ``costs[i](a)``. They must be pure functions."""
    costs = list(costs)
    sets = list(action_sets)
    if len(costs) != len(sets):
        raise UsageError("one cost per player required")

    def cost(i, a):
        return costs[i](a)

    return GameSpec(
        name=name, n_players=len(sets), dim_per_player=sets[0].dim, action_sets=sets,
        cost=cost, mapping=mapping, monotonicity=monotonicity, modulus=modulus,
        known_solutions=known_solutions or KnownSolutions(), lipschitz=lipschitz,
        cost_growth=cost_growth, vectorized=vectorized,
    )


CATALOG = {
    "bilinear_zero_sum": bilinear_zero_sum,
    "matching_pennies_mixed": matching_pennies_mixed,
    "matching_pennies": matching_pennies_mixed,
    "cournot_duopoly": cournot_duopoly,
    "cournot": cournot,
    "affine_monotone": affine_monotone,
}
