"""Step-size, noise, regularization and shrinkage schedules.

A schedule produces, at round ``t >= 1``::

    gamma_t = (t + t_offset - 1) ** -a1      step size
    sigma_t = (t + t_offset - 1) ** -a2      sampling standard deviation
    eps_t   = (t + t_offset - 1) ** -a3      Tikhonov weight
    r_t     = min((t + t_offset - 1) ** -a4, r_cap)   shrinkage radius
    beta_t  = gamma_t * sigma_t ** 2
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

import numpy as np

from .exceptions import ScheduleValidationError, UsageError

REFERENCE_EXPONENTS = (Fraction(5, 9), Fraction(5, 27), Fraction(1, 54), Fraction(1, 6))
# fast deterministic schedule for one-timescale / Tikhonov experiments
AGGRESSIVE_EXPONENTS = (0.51, 0.17, 0.10, 0.14)


def parse_exponent(value):
    """Accept floats, ints, ``Fraction`` or strings such as ``"5/9"``."""
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


class ScheduleValues(NamedTuple):
    gamma: float
    sigma: float
    eps: float
    r: float
    beta: float


@dataclass(frozen=True)
class ScheduleSpec:
    """Power-law schedule, or four custom generators ``f(t) -> float`` when ``custom`` is set."""

    a1: float = float(REFERENCE_EXPONENTS[0])
    a2: float = float(REFERENCE_EXPONENTS[1])
    a3: float = float(REFERENCE_EXPONENTS[2])
    a4: float = float(REFERENCE_EXPONENTS[3])
    t_offset: int = 1
    r_cap: Optional[float] = None
    custom: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4"):
            object.__setattr__(self, name, parse_exponent(getattr(self, name)))
        if self.custom is None:
            for name in ("a1", "a2", "a3", "a4"):
                v = getattr(self, name)
                if not 0 < v < 1:
                    raise UsageError(f"exponent {name}={v} must lie in (0, 1)")
        elif len(self.custom) != 4:
            raise UsageError("custom schedules need four generators (gamma, sigma, eps, r)")
        if int(self.t_offset) < 1:
            raise UsageError("t_offset must be a positive integer")
        if self.r_cap is not None and not self.r_cap > 0:
            raise UsageError("r_cap must be positive")

    @classmethod
    def reference(cls, **kw):
        return cls(*REFERENCE_EXPONENTS, **kw)

    @classmethod
    def aggressive(cls, **kw):
        return cls(*AGGRESSIVE_EXPONENTS, **kw)

    @classmethod
    def from_functions(cls, gamma, sigma, eps, r, **kw):
        return cls(custom=(gamma, sigma, eps, r), **kw)

    @property
    def exponents(self):
        return (self.a1, self.a2, self.a3, self.a4)

    def with_r_cap(self, r_cap):
        return replace(self, r_cap=r_cap)

    def evaluate(self, t):
        if t < 1:
            raise UsageError("schedules are defined for t >= 1")
        g, s, e, r, b = self.evaluate_many(np.array([t]))
        return ScheduleValues(float(g[0]), float(s[0]), float(e[0]), float(r[0]), float(b[0]))

    def evaluate_many(self, ts):
        """Vectorized :meth:`evaluate` over an integer array ``ts``."""
        ts = np.asarray(ts)
        if np.any(ts < 1):
            raise UsageError("schedules are defined for t >= 1")
        if self.custom is not None:
            gamma, sigma, eps, r = (np.array([float(f(int(t))) for t in ts]) for f in self.custom)
        else:
            base = ts.astype(float) + (self.t_offset - 1)
            gamma = base ** -self.a1
            sigma = base ** -self.a2
            eps = base ** -self.a3
            r = base ** -self.a4
        if self.r_cap is not None:
            r = np.minimum(r, self.r_cap)
        return gamma, sigma, eps, r, gamma * sigma**2


# ---------------------------------------------------------------------------
# exponent conditions


@dataclass(frozen=True)
class ConditionResult:
    satisfied: bool
    margin: float
    failed: tuple = ()

    def __bool__(self):
        return self.satisfied


def _ineqs(a1, a2, a3, a4):
    # (label, value, threshold, sense): each check is "value < threshold" or "value > threshold"
    return {
        "i": [("a1 + 2a2 < 1", a1 + 2 * a2, 1.0, "<"),
              ("a1 + 2a2 + a3 < 1", a1 + 2 * a2 + a3, 1.0, "<")],
        "ii": [("a1 + 2a2 + a3 < 1", a1 + 2 * a2 + a3, 1.0, "<"),
               ("a1 + 2a2 + 6a3 - 2a4 < 1", a1 + 2 * a2 + 6 * a3 - 2 * a4, 1.0, "<")],
        "iii": [("2a1 > 1", 2 * a1, 1.0, ">"),
                ("a1 + 3a2 > 1", a1 + 3 * a2, 1.0, ">")],
        "iv": [("a3 < a4", a3, a4, "<"),
               ("a4 < a2", a4, a2, "<")],
    }


@dataclass(frozen=True)
class ScheduleReport:
    exponents: tuple
    conditions: dict
    mode: str = "full"

    def valid(self):
        return all(c.satisfied for c in self.conditions.values())

    def violated(self):
        return [k for k, c in self.conditions.items() if not c.satisfied]

    def failure_message(self):
        parts = []
        for name in self.violated():
            c = self.conditions[name]
            parts.append(f"condition {name}: {'; '.join(c.failed)} (margin {c.margin:.6g})")
        return "invalid schedule exponents: " + ", ".join(parts) if parts else "valid"

    def lines(self):
        out = []
        for name, c in self.conditions.items():
            status = "pass" if c.satisfied else "FAIL"
            extra = f" violated: {'; '.join(c.failed)}" if c.failed else ""
            out.append(f"condition {name}: {status} margin={c.margin:.6g}{extra}")
        return out


def validate_exponents(a1, a2, a3, a4, mode="full", free_sets=False):
    """Check the sufficient exponent conditions i-iv, with signed margins.

    ``mode="deterministic"`` drops condition iii (only needed to control the
    stochastic terms). ``free_sets=True`` drops the inequalities that involve
    the shrinkage exponent ``a4``, which has no effect when the action sets are
    unbounded.
    """
    a = tuple(parse_exponent(v) for v in (a1, a2, a3, a4))
    for name, v in zip(("a1", "a2", "a3", "a4"), a):
        if not 0 < v < 1:
            raise UsageError(f"exponent {name}={v} must lie in (0, 1)")
    if mode not in ("full", "deterministic"):
        raise UsageError(f"unknown validation mode {mode!r}")
    results = {}
    for name, checks in _ineqs(*a).items():
        if mode == "deterministic" and name == "iii":
            continue
        if free_sets:
            checks = [c for c in checks if "a4" not in c[0]]
            if not checks:
                continue
        margins, failed = [], []
        for label, value, threshold, sense in checks:
            m = threshold - value if sense == "<" else value - threshold
            margins.append(m)
            if not m > 0:
                failed.append(label)
        results[name] = ConditionResult(not failed, float(min(margins)), tuple(failed))
    return ScheduleReport(a, results, mode)


def validate_schedule(schedule, mode="full", free_sets=False):
    """Validate a power-law :class:`ScheduleSpec`; raise ``ScheduleValidationError`` if invalid."""
    if schedule.custom is not None:
        return None
    report = validate_exponents(*schedule.exponents, mode=mode, free_sets=free_sets)
    if not report.valid():
        raise ScheduleValidationError(report)
    return report


def summability_probe(schedule, T):
    """Partial sums up to ``T`` of the series the exponent conditions control.

    Keys: ``beta``, ``beta_eps`` (should diverge); ``gamma_sq``, ``beta_sigma``,
    ``eps_variation``, ``r_variation`` (should converge). Variation terms start at t=2.
    """
    if T < 2:
        raise UsageError("T must be >= 2")
    ts = np.arange(1, T + 1)
    g, s, e, r, b = schedule.evaluate_many(ts)
    de = np.diff(e)
    dr = np.diff(r)
    return {
        "beta": float(np.sum(b)),
        "beta_eps": float(np.sum(b * e)),
        "gamma_sq": float(np.sum(g**2)),
        "beta_sigma": float(np.sum(b * s)),
        "eps_variation": float(np.sum(de**2 / (b[1:] * e[1:] ** 3))),
        "r_variation": float(np.sum(dr**2 / (b[1:] * e[1:] ** 6))),
    }


DIVERGENT_SERIES = ("beta", "beta_eps")
CONVERGENT_SERIES = ("gamma_sq", "beta_sigma", "eps_variation", "r_variation")
