"""Projectable convex action sets with exact shrinkage.

Every set supports Euclidean projection, shrinkage ``(1 - r)A`` (the points of
``A`` at distance at least ``r`` from its boundary), distance to the boundary
and the inradius. Projections accept a single point of shape ``(dim,)`` or a
batch of shape ``(..., dim)``.

The simplex is treated inside its affine hull ``{x : sum(x) = 1}``: boundary,
distances and inradius are all relative to that hull.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import itertools
import math

import numpy as np
from scipy.optimize import linprog

from .exceptions import (
    DomainError,
    EmptyShrunkSetError,
    InfeasibleSetError,
    UsageError,
)

MEMBER_TOL = 1e-9
_NORMAL_TOL = 1e-12


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise UsageError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x


class ConvexSet:
    """Common interface. Subclasses are immutable value objects."""

    dim: int

    def project(self, x):
        raise NotImplementedError

    def shrink(self, r):
        raise NotImplementedError

    def inradius(self):
        raise NotImplementedError

    def _slack(self, x):
        """Signed distance to the boundary (negative outside), batched."""
        raise NotImplementedError

    def contains(self, x, tol=MEMBER_TOL):
        x = _as_points(x, self.dim)
        return self._slack(x) >= -tol

    def distance_to_boundary(self, x, tol=MEMBER_TOL):
        x = _as_points(x, self.dim)
        slack = self._slack(x)
        if np.any(slack < -tol):
            raise DomainError("point lies outside the set")
        return np.maximum(slack, 0.0) if np.ndim(slack) else max(float(slack), 0.0)

    def sample(self, rng, n):
        """``n`` points of the set (not necessarily uniform)."""
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def lemma3_constant(self):
        """Upper bound on ||P_{A_r1} x - P_{A_r2} x|| / |r1 - r2|, if known."""
        return None

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Free(ConvexSet):
    """All of R^dim. Projection and shrinkage are identities."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise UsageError("dim must be positive")

    def project(self, x):
        return _as_points(x, self.dim).copy()

    def shrink(self, r):
        return self

    def inradius(self):
        return math.inf

    def _slack(self, x):
        out = np.full(x.shape[:-1], np.inf)
        return out if out.ndim else float(out)

    def sample(self, rng, n):
        return 2.0 * rng.standard_normal((n, self.dim))

    def bounding_box(self):
        return -2.0 * np.ones(self.dim), 2.0 * np.ones(self.dim)

    def lemma3_constant(self):
        return 0.0

    def to_dict(self):
        return {"type": "free", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise UsageError("lower and upper must be vectors of equal length")
        if not np.all(lo < hi):
            raise InfeasibleSetError("Box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "dim", lo.size)

    def project(self, x):
        return np.clip(_as_points(x, self.dim), self.lower, self.upper)

    def shrink(self, r):
        if r == 0:
            return self
        rad = self.inradius()
        if r >= rad:
            raise EmptyShrunkSetError(r, rad)
        return Box(self.lower + r, self.upper - r)

    def inradius(self):
        return float(np.min(self.upper - self.lower) / 2.0)

    def _slack(self, x):
        return np.minimum(x - self.lower, self.upper - x).min(axis=-1)

    def sample(self, rng, n):
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def lemma3_constant(self):
        # worst case at a corner: every coordinate moves by |dr|
        return math.sqrt(self.dim)

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    dim: int = field(init=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.ndim != 1:
            raise UsageError("center must be a vector")
        if not self.radius > 0:
            raise InfeasibleSetError("Ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "dim", c.size)

    def project(self, x):
        x = _as_points(x, self.dim)
        d = x - self.center
        nrm = np.linalg.norm(d, axis=-1, keepdims=True)
        scale = np.where(nrm > self.radius, self.radius / np.maximum(nrm, 1e-300), 1.0)
        return self.center + d * scale

    def shrink(self, r):
        if r == 0:
            return self
        if r >= self.radius:
            raise EmptyShrunkSetError(r, self.radius)
        return Ball(self.center, self.radius - r)

    def inradius(self):
        return self.radius

    def _slack(self, x):
        return self.radius - np.linalg.norm(x - self.center, axis=-1)

    def sample(self, rng, n):
        g = rng.standard_normal((n, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        u = rng.uniform(size=(n, 1)) ** (1.0 / self.dim)
        return self.center + self.radius * u * g

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def lemma3_constant(self):
        return 1.0

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


def project_simplex(y, total=1.0):
    """Project rows of ``y`` onto ``{x >= 0, sum(x) = total}`` (sort and threshold)."""
    y = np.asarray(y, dtype=float)
    shape = y.shape
    n = shape[-1]
    flat = y.reshape(-1, n)
    u = -np.sort(-flat, axis=1)
    css = np.cumsum(u, axis=1) - total
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(flat.shape[0]), rho] / (rho + 1)
    return np.maximum(flat - theta[:, None], 0.0).reshape(shape)


@dataclass(frozen=True, eq=False)
class Simplex(ConvexSet):
    """``{x : sum(x) = 1, x_k >= floor}``; ``floor = 0`` is the probability simplex.

    Shrunk simplexes raise ``floor``; distances live in the affine hull.
    """

    dim: int
    floor: float = 0.0

    def __post_init__(self):
        if self.dim < 2:
            raise UsageError("Simplex needs dim >= 2")
        if not self.floor * self.dim < 1:
            raise InfeasibleSetError("Simplex floor too high; set is empty")

    @property
    def facet_factor(self):
        # distance within the hull to facet {x_k = floor} is (x_k - floor) / facet_factor
        return math.sqrt(1.0 - 1.0 / self.dim)

    def project(self, x):
        x = _as_points(x, self.dim)
        mass = 1.0 - self.dim * self.floor
        return self.floor + project_simplex(x - self.floor, mass)

    def shrink(self, r):
        if r == 0:
            return self
        rad = self.inradius()
        if r >= rad:
            raise EmptyShrunkSetError(r, rad)
        return Simplex(self.dim, self.floor + r * self.facet_factor)

    def inradius(self):
        return (1.0 / self.dim - self.floor) / self.facet_factor

    def _slack(self, x):
        off_hull = np.abs(x.sum(axis=-1) - 1.0)
        slack = (x - self.floor).min(axis=-1) / self.facet_factor
        slack = np.where(off_hull > MEMBER_TOL, -np.inf, slack)
        return slack if slack.ndim else float(slack)

    def sample(self, rng, n):
        p = rng.dirichlet(np.ones(self.dim), size=n)
        return self.floor + (1.0 - self.dim * self.floor) * p

    def bounding_box(self):
        top = 1.0 - (self.dim - 1) * self.floor
        return np.full(self.dim, self.floor), np.full(self.dim, top)

    def to_dict(self):
        return {"type": "simplex", "dim": self.dim, "floor": self.floor}


@dataclass(frozen=True, eq=False)
class Polyhedron(ConvexSet):
    """``{x : normals @ x <= offsets}``. Rows of ``normals`` are rescaled to unit norm.

    Shrinking subtracts ``r`` from every offset, which is exact for unit normals.
    With few facets the projection is exact: it is the nearest feasible point
    among projections onto the affine spans of at most ``dim`` facets. Larger
    systems use Dykstra's alternating projections followed by an active-set
    polish.
    """

    normals: np.ndarray
    offsets: np.ndarray
    dim: int = field(init=False)

    max_sweeps = 10_000
    tol = 1e-10
    max_faces = 4096

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if A.shape[0] != b.size:
            raise UsageError("one offset per normal required")
        nrm = np.linalg.norm(A, axis=1)
        if np.any(nrm == 0):
            raise UsageError("zero normal vector")
        A = A / nrm[:, None]
        b = b / nrm
        assert np.all(np.abs(np.linalg.norm(A, axis=1) - 1) <= _NORMAL_TOL)
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "dim", A.shape[1])
        self._chebyshev  # raises on empty sets

    @cached_property
    def _chebyshev(self):
        # max rho s.t. A x + rho <= b ; rho >= 0
        m, n = self.normals.shape
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.normals, np.ones((m, 1))])
        bounds = [(None, None)] * n + [(0, None)]
        res = linprog(c, A_ub=A_ub, b_ub=self.offsets, bounds=bounds, method="highs")
        if res.status == 2:
            raise InfeasibleSetError("polyhedron is empty")
        if res.status == 3:
            return math.inf, None
        if res.status != 0:
            raise InfeasibleSetError(f"Chebyshev LP failed: {res.message}")
        return float(res.x[-1]), res.x[:-1]

    @property
    def chebyshev_center(self):
        rad, center = self._chebyshev
        if center is None:
            return self.project(np.zeros(self.dim))
        return center

    @cached_property
    def bounded(self):
        lo, hi = self._box
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    @cached_property
    def _box(self):
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for k in range(self.dim):
            for sign, store in ((1.0, lo), (-1.0, hi)):
                c = np.zeros(self.dim)
                c[k] = sign
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                              bounds=[(None, None)] * self.dim, method="highs")
                if res.status == 0:
                    store[k] = res.x[k]
        return lo, hi

    def project(self, x):
        x = _as_points(x, self.dim)
        flat = x.reshape(-1, self.dim)
        if self._faces is not None:
            out = np.concatenate([self._face_search(flat[k:k + 2048])
                                  for k in range(0, flat.shape[0], 2048)])
        else:
            out = self._dykstra(flat)
            out = np.array([self._polish(xi, pi) for xi, pi in zip(flat, out)])
        return out.reshape(x.shape)

    @cached_property
    def _faces(self):
        # affine projectors y = x - A_S' (A_S A_S')^-1 (A_S x - b_S) for independent subsets S
        A, b = self.normals, self.offsets
        m, n = A.shape
        count = sum(math.comb(m, k) for k in range(min(m, n) + 1))
        if count > self.max_faces:
            return None
        mats, shifts = [np.eye(n)], [np.zeros(n)]
        for k in range(1, min(m, n) + 1):
            for S in itertools.combinations(range(m), k):
                As = A[list(S)]
                G = As @ As.T
                if np.linalg.matrix_rank(G, tol=1e-10) < k:
                    continue
                W = As.T @ np.linalg.inv(G)
                mats.append(np.eye(n) - W @ As)
                shifts.append(W @ b[list(S)])
        return np.array(mats), np.array(shifts)

    def _face_search(self, x):
        mats, shifts = self._faces
        cand = np.einsum("kij,pj->pki", mats, x) + shifts
        viol = (cand @ self.normals.T - self.offsets).max(axis=-1)
        dist = np.sum((cand - x[:, None, :]) ** 2, axis=-1)
        dist = np.where(viol <= 1e-10, dist, np.inf)
        best = np.argmin(dist, axis=1)
        return cand[np.arange(x.shape[0]), best]

    def _dykstra(self, x):
        A, b = self.normals, self.offsets
        cur = x.copy()
        incr = np.zeros((A.shape[0],) + x.shape)
        for _ in range(self.max_sweeps):
            prev = cur.copy()
            for j in range(A.shape[0]):
                y = cur + incr[j]
                viol = np.maximum(y @ A[j] - b[j], 0.0)
                cur = y - viol[:, None] * A[j]
                incr[j] = y - cur
            if np.max(np.abs(cur - prev)) <= self.tol and np.max(cur @ A.T - b) <= self.tol:
                break
        return cur

    def _polish(self, x, approx):
        A, b = self.normals, self.offsets
        active = np.flatnonzero(b - A @ approx < 1e-7)
        if active.size == 0:
            return x.copy() if np.all(A @ x <= b) else approx
        Aa = A[active]
        lam, *_ = np.linalg.lstsq(Aa @ Aa.T, Aa @ x - b[active], rcond=None)
        cand = x - Aa.T @ lam
        if np.all(lam >= -1e-9) and np.all(A @ cand - b <= 1e-12):
            return cand
        return approx

    def shrink(self, r):
        if r == 0:
            return self
        rad = self.inradius()
        if r >= rad:
            raise EmptyShrunkSetError(r, rad)
        return Polyhedron(self.normals, self.offsets - r)

    def inradius(self):
        return self._chebyshev[0]

    def _slack(self, x):
        return (self.offsets - x @ self.normals.T).min(axis=-1)

    def sample(self, rng, n):
        lo, hi = self.bounding_box()
        pts = rng.uniform(lo, hi, size=(4 * n + 16, self.dim))
        inside = pts[self.contains(pts)]
        if inside.shape[0] >= n:
            return inside[:n]
        return self.project(rng.uniform(lo, hi, size=(n, self.dim)))

    def bounding_box(self):
        lo, hi = self._box
        c = self.chebyshev_center
        lo = np.where(np.isfinite(lo), lo, c - 2.0)
        hi = np.where(np.isfinite(hi), hi, c + 2.0)
        return lo, hi

    def to_dict(self):
        return {"type": "polyhedron", "normals": self.normals.tolist(),
                "offsets": self.offsets.tolist()}


def set_from_dict(spec):
    kind = spec["type"].lower()
    if kind == "free":
        return Free(int(spec["dim"]))
    if kind == "box":
        return Box(spec["lower"], spec["upper"])
    if kind == "ball":
        return Ball(spec["center"], float(spec["radius"]))
    if kind == "simplex":
        return Simplex(int(spec["dim"]), float(spec.get("floor", 0.0)))
    if kind == "polyhedron":
        return Polyhedron(spec["normals"], spec["offsets"])
    raise UsageError(f"unknown set type {spec['type']!r}")


class ProductSet:
    """Cartesian product ``A_1 x ... x A_N`` acting on stacked joint points."""

    def __init__(self, sets):
        self.sets = tuple(sets)
        if not self.sets:
            raise UsageError("need at least one factor")
        self.n_players = len(self.sets)
        self.dims = tuple(s.dim for s in self.sets)
        self.dim = sum(self.dims)
        self._cuts = np.cumsum((0,) + self.dims)
        boxlike = all(isinstance(s, (Box, Free)) for s in self.sets)
        if boxlike:
            lo, hi = [], []
            for s in self.sets:
                if isinstance(s, Box):
                    lo.append(s.lower)
                    hi.append(s.upper)
                else:
                    lo.append(np.full(s.dim, -np.inf))
                    hi.append(np.full(s.dim, np.inf))
            self._lo = np.concatenate(lo)
            self._hi = np.concatenate(hi)
        else:
            self._lo = self._hi = None

    def blocks(self, x):
        x = np.asarray(x, dtype=float)
        return [x[..., self._cuts[i]:self._cuts[i + 1]] for i in range(self.n_players)]

    def project(self, x):
        x = _as_points(x, self.dim)
        if self._lo is not None:
            return np.clip(x, self._lo, self._hi)
        return np.concatenate([s.project(b) for s, b in zip(self.sets, self.blocks(x))], axis=-1)

    def shrink(self, r):
        if r == 0:
            return self
        return ProductSet([s.shrink(r) for s in self.sets])

    def project_shrunk(self, x, r):
        """``self.shrink(r).project(x)`` with a fast path for boxes."""
        if self._lo is None or r == 0:
            return self.shrink(r).project(x)
        if r >= self._inradius:
            raise EmptyShrunkSetError(r, self._inradius)
        return np.clip(x, self._lo + r, self._hi - r)

    @cached_property
    def _inradius(self):
        return min(s.inradius() for s in self.sets)

    def inradius(self):
        return self._inradius

    def contains(self, x, tol=MEMBER_TOL):
        x = _as_points(x, self.dim)
        ok = [s.contains(b, tol) for s, b in zip(self.sets, self.blocks(x))]
        return np.logical_and.reduce(ok)

    def distance_to_boundary(self, x, tol=MEMBER_TOL):
        return np.minimum.reduce(
            [np.asarray(s.distance_to_boundary(b, tol)) for s, b in zip(self.sets, self.blocks(x))]
        )

    def sample(self, rng, n):
        return np.concatenate([s.sample(rng, n) for s in self.sets], axis=1)

    def bounding_box(self):
        boxes = [s.bounding_box() for s in self.sets]
        return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])

    @property
    def all_free(self):
        return all(isinstance(s, Free) for s in self.sets)

    def __repr__(self):
        return f"ProductSet({list(self.sets)!r})"


# module-level aliases mirroring the operation names


def project(s, x):
    return s.project(x)


def shrink(s, r):
    return s.shrink(r)


def distance_to_boundary(s, x):
    return s.distance_to_boundary(x)


def inradius(s):
    return s.inradius()


def random_polyhedron(rng, dim=2, n_facets=8, offset_range=(0.5, 1.5)):
    """Bounded polyhedron with random unit normals containing the ball of radius ``offset_range[0]``."""
    for _ in range(100):
        A = rng.standard_normal((n_facets, dim))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        b = rng.uniform(*offset_range, size=n_facets)
        P = Polyhedron(A, b)
        if P.bounded:
            return P
    raise InfeasibleSetError("could not draw a bounded polyhedron")
