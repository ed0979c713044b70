"""Batch experiments: config parsing, seed sweeps, CSV traces and summaries.

Configs are TOML files with flat dotted sections::

    algo = "bandit"            # bandit | bandit-no-eps | one-timescale | tikhonov-path
    seeds = [1, 2, 3]
    T = 200000
    log_every = 1000
    target = "known"           # "known", "least-norm" or an explicit point
    output_dir = "runs/bilinear"

    [game]
    name = "bilinear_zero_sum"
    box = [-1.0, 1.0]

    [schedule]
    a1 = "5/9"
    a2 = "5/27"
    a3 = "1/54"
    a4 = "1/6"

    [init]
    mu0 = [0.9, 0.9]

All numbers written to CSV use 17 significant digits.
"""

from __future__ import annotations

import csv
import glob as globmod
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import games as G
from .exceptions import UsageError
from .learner import run as bandit_run
from .schedules import ScheduleSpec, validate_schedule
from .sets import Box, set_from_dict
from .vi import default_r_cap, one_timescale_run, regularized_solution, tikhonov_path

OUTPUT_DIR_ENV = "BANDIT_NASH_OUTPUT_DIR"
ALGOS = ("bandit", "bandit-no-eps", "one-timescale", "tikhonov-path")
STOCHASTIC = ("bandit", "bandit-no-eps")
TRACE_ALGO_LABEL = {
    "bandit": "bandit",
    "bandit-no-eps": "bandit-no-eps",
    "one-timescale": "z-iterate",
    "tikhonov-path": "tikhonov-path",
}


def fmt(x):
    """Decimal text with 17 significant digits; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class ExperimentConfig:
    game: dict
    schedule: dict = field(default_factory=dict)
    algo: str = "bandit"
    seeds: list = field(default_factory=lambda: [0])
    T: int = 1000
    log_every: int = 1
    target: object = None
    output_dir: str = "runs"
    init: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise UsageError(f"unknown algo {self.algo!r}; expected one of {ALGOS}")
        if self.algo in STOCHASTIC and not self.seeds:
            raise UsageError("stochastic algorithms need a non-empty seed list")
        if int(self.T) < 1:
            raise UsageError("T must be >= 1")
        if int(self.log_every) < 1:
            raise UsageError("log_every must be >= 1")
        self.T = int(self.T)
        self.log_every = int(self.log_every)
        self.seeds = [int(s) for s in self.seeds]

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f for f in cls.__dataclass_fields__}
        extra = {k: d.pop(k) for k in list(d) if k not in known}
        if extra:
            opts = dict(d.get("options", {}))
            opts.update(extra)
            d["options"] = opts
        if "game" not in d:
            raise UsageError("config needs a [game] section")
        return cls(**d)

    def to_dict(self):
        out = asdict(self)
        if out["target"] is None:
            out.pop("target")
        for key in ("init", "options", "schedule"):
            if not out[key]:
                out.pop(key)
        return out


def load_config(path):
    with open(path, "rb") as fh:
        return ExperimentConfig.from_dict(tomllib.load(fh))


# ---------------------------------------------------------------------------
# TOML echo


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, np.ndarray):
        return _toml_value(v.tolist())
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot encode {type(v).__name__} in a config")


def dump_config(config):
    lines = []
    for key, value in config.to_dict().items():
        if isinstance(value, dict):
            for sub, v in value.items():
                lines.append(f"{key}.{sub} = {_toml_value(v)}")
        else:
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# resolution


def build_game(spec):
    spec = dict(spec)
    name = spec.pop("name", None)
    if name is None:
        if "B" in spec:
            name = "affine_monotone"
        else:
            raise UsageError("game.name is required")
    sets = None
    if "sets" in spec:
        sets = [set_from_dict(s) for s in spec.pop("sets")]
    box = spec.pop("box", None)
    if name == "bilinear_zero_sum":
        C = np.atleast_2d(np.asarray(spec.pop("C", [[1.0]]), dtype=float))
        d = C.shape[0]
        if sets is None and box is not None:
            sets = [Box(np.full(d, box[0]), np.full(d, box[1]))] * 2
        game = G.bilinear_zero_sum(C, action_sets=sets)
    elif name in ("matching_pennies_mixed", "matching_pennies"):
        game = G.matching_pennies_mixed()
    elif name in ("cournot_duopoly", "cournot"):
        game = G.cournot(int(spec.pop("n_players", 2)))
    elif name == "affine_monotone":
        B = spec.pop("B")
        b = spec.pop("b")
        d = int(spec.pop("dim_per_player", 1))
        if sets is None and box is not None:
            n = len(b) // d
            sets = [Box(np.full(d, box[0]), np.full(d, box[1]))] * n
        game = G.affine_monotone(B, b, action_sets=sets, dim_per_player=d)
    elif name == "zero":
        if sets is None:
            raise UsageError("game 'zero' needs explicit game.sets")
        game = G.zero_game(sets)
    else:
        raise UsageError(f"unknown game {name!r}")
    return game


def build_schedule(spec):
    spec = dict(spec)
    a = [spec.pop(k, v) for k, v in zip(("a1", "a2", "a3", "a4"), ("5/9", "5/27", "1/54", "1/6"))]
    return ScheduleSpec(*a, t_offset=int(spec.pop("t_offset", 1)),
                        r_cap=spec.pop("r_cap", None))


def resolve_target(target, game):
    if target is None:
        return None
    if isinstance(target, str):
        if target == "known":
            pt = game.known_solutions.least_norm
            if pt is None:
                raise UsageError(f"game {game.name!r} has no known solution")
            return np.asarray(pt, dtype=float)
        if target == "least-norm":
            pt = game.known_solutions.least_norm
            if pt is not None:
                return np.asarray(pt, dtype=float)
            return regularized_solution(game, 1e-8).point
        raise UsageError(f"unknown target {target!r}")
    return np.asarray(target, dtype=float)


# ---------------------------------------------------------------------------
# traces


def trace_header(n):
    return (["algo", "game", "seed", "t"] + [f"mu_{k}" for k in range(n)]
            + [f"a_{k}" for k in range(n)] + ["dist_to_target", "gamma", "sigma", "eps", "r"])


def write_trace(path, algo, game_name, seed, rows, n):
    """``rows``: iterable of (t, mu, a, dist, gamma, sigma, eps, r)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(n))
        for t, mu, a, dist, g, s, e, r in rows:
            w.writerow([algo, game_name, "" if seed is None else seed, int(t)]
                       + [fmt(v) for v in mu] + [fmt(v) for v in a]
                       + [fmt(dist), fmt(g), fmt(s), fmt(e), fmt(r)])


def _bandit_job(args):
    config_dict, seed, path = args
    cfg = ExperimentConfig.from_dict(config_dict)
    game = build_game(cfg.game)
    schedule = build_schedule(cfg.schedule)
    target = resolve_target(cfg.target, game)
    mu0 = cfg.init.get("mu0")
    tr = bandit_run(
        game, schedule, seed, cfg.T, cfg.log_every, target=target,
        mu0=None if mu0 is None else np.asarray(mu0, dtype=float),
        eps_off=cfg.algo == "bandit-no-eps", r_fixed=cfg.options.get("r_fixed"),
        payoff_noise=float(cfg.options.get("payoff_noise", 0.0)),
    )
    rows = zip(tr.t, tr.mu, tr.a, tr.dist, tr.gamma, tr.sigma, tr.eps, tr.r)
    write_trace(path, TRACE_ALGO_LABEL[cfg.algo], game.name, seed, rows, game.joint_dim)
    return str(path), tr.aborted


@dataclass
class ExperimentResult:
    trace_paths: list
    summary_path: Path
    config_path: Path
    summary: "SummaryStats"
    aborted: dict = field(default_factory=dict)


def run_experiment(config, output_dir=None, workers=None):
    """Run a config (path or :class:`ExperimentConfig`) and write its output files.

    ``output_dir`` (or the ``BANDIT_NASH_OUTPUT_DIR`` environment variable)
    overrides the config's directory.
    """
    if not isinstance(config, ExperimentConfig):
        config = load_config(config)
    out = Path(output_dir or os.environ.get(OUTPUT_DIR_ENV) or config.output_dir)
    game = build_game(config.game)
    schedule = build_schedule(config.schedule)
    if config.algo in STOCHASTIC:
        validate_schedule(schedule, mode="full")
    elif config.algo == "one-timescale":
        validate_schedule(schedule, mode="deterministic",
                          free_sets=game.joint_set.all_free)
    target = resolve_target(config.target, game)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}") from exc

    label = TRACE_ALGO_LABEL[config.algo]
    paths = []
    aborted = {}
    if config.algo in STOCHASTIC:
        jobs = [(config.to_dict(), s, out / f"trace_{label}_seed{s}.csv") for s in config.seeds]
        workers = int(workers or config.options.get("workers", 1))
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                results = list(pool.map(_bandit_job, jobs))
        else:
            results = [_bandit_job(j) for j in jobs]
        for (path, msg), job in zip(results, jobs):
            paths.append(Path(path))
            if msg:
                aborted[job[1]] = msg
    else:
        path = out / f"trace_{label}.csv"
        rows = _deterministic_rows(config, game, schedule, target)
        write_trace(path, label, game.name, None, rows, game.joint_dim)
        paths.append(path)

    stats = summarize(paths)
    summary_path = out / "summary.csv"
    write_summary(summary_path, stats)
    config_path = out / "config.resolved.toml"
    resolved = ExperimentConfig.from_dict(config.to_dict())
    resolved.output_dir = str(out)
    config_path.write_text(dump_config(resolved))
    return ExperimentResult(paths, summary_path, config_path, stats, aborted)


def _deterministic_rows(config, game, schedule, target):
    if schedule.r_cap is None:
        schedule = schedule.with_r_cap(default_r_cap(game.action_sets))

    def dist(p):
        return None if target is None else float(np.linalg.norm(p - target))

    if config.algo == "one-timescale":
        z0 = np.asarray(config.init.get("z0", config.init.get("mu0", np.zeros(game.joint_dim))),
                        dtype=float)
        tr = one_timescale_run(game, schedule, z0, config.T, config.log_every, check_schedule=False)
        return [(t, z, z, dist(z), g, s, e, r)
                for t, z, g, s, e, r in zip(tr.t, tr.points, tr.gamma, tr.sigma, tr.eps, tr.r)]
    ts = [1] + list(range(config.log_every, config.T + 1, config.log_every))
    if ts[-1] != config.T:
        ts.append(config.T)
    ts = sorted(set(ts))
    path = tikhonov_path(game, schedule, ts)
    rows = []
    for p in path:
        v = schedule.evaluate(p.t)
        rows.append((p.t, p.y, p.y, dist(p.y), v.gamma, v.sigma, v.eps, v.r))
    return rows


# ---------------------------------------------------------------------------
# summaries


@dataclass
class SummaryStats:
    t: np.ndarray
    n_traces: int
    median: np.ndarray
    p10: np.ndarray
    p90: np.ndarray
    initial_window: dict
    final_window: dict


def read_trace(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    return header, rows


def _window(n):
    return max(1, int(n * 0.1))


def summarize(paths):
    """Cross-trace percentiles of ``dist_to_target`` at each logged t, plus window means.

    Windows are the first and last 10% of logged rows; their entries are means of
    the per-t median / 10th / 90th percentiles.
    """
    if isinstance(paths, (str, Path)):
        paths = sorted(globmod.glob(str(paths)))
    paths = list(paths)
    if not paths:
        raise UsageError("no trace files to summarize")
    header = None
    dists = []
    ts = None
    for p in paths:
        h, rows = read_trace(p)
        if header is None:
            header = h
        elif h != header:
            raise UsageError(f"schema mismatch in {p}")
        col_t = h.index("t")
        col_d = h.index("dist_to_target")
        this_t = np.array([int(row[col_t]) for row in rows])
        if ts is None:
            ts = this_t
        elif not np.array_equal(ts, this_t):
            raise UsageError(f"logged steps differ in {p}")
        dists.append([float(row[col_d]) if row[col_d] != "" else np.nan for row in rows])
    D = np.array(dists)
    med = np.median(D, axis=0)
    p10 = np.percentile(D, 10, axis=0)
    p90 = np.percentile(D, 90, axis=0)
    w = _window(len(ts))

    def win(sl):
        return {"median": float(np.mean(med[sl])), "p10": float(np.mean(p10[sl])),
                "p90": float(np.mean(p90[sl]))}

    return SummaryStats(ts, len(paths), med, p10, p90, win(slice(0, w)), win(slice(len(ts) - w, None)))


def write_summary(path, stats):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "t", "n_traces", "median", "p10", "p90"])
        for t, m, lo, hi in zip(stats.t, stats.median, stats.p10, stats.p90):
            w.writerow(["step", int(t), stats.n_traces, fmt(m), fmt(lo), fmt(hi)])
        for name in ("initial_window", "final_window"):
            v = getattr(stats, name)
            w.writerow([name, "", stats.n_traces, fmt(v["median"]), fmt(v["p10"]), fmt(v["p90"])])


def read_summary(path):
    """Inverse of :func:`write_summary` (window entries keyed by section name)."""
    _, rows = read_trace(path)
    steps = [r for r in rows if r[0] == "step"]
    wins = {r[0]: {"median": float(r[3]), "p10": float(r[4]), "p90": float(r[5])}
            for r in rows if r[0] != "step"}
    return SummaryStats(
        t=np.array([int(r[1]) for r in steps]), n_traces=int(rows[0][2]) if rows else 0,
        median=np.array([float(r[3]) for r in steps]), p10=np.array([float(r[4]) for r in steps]),
        p90=np.array([float(r[5]) for r in steps]),
        initial_window=wins.get("initial_window"), final_window=wins.get("final_window"),
    )


def config_equivalent(a, b):
    """Configs equal after resolving fraction strings and numeric types."""
    def norm(v):
        if isinstance(v, dict):
            return {k: norm(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [norm(x) for x in v]
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return float(v)
        return v
    return norm(a.to_dict()) == norm(b.to_dict())



# ---------------------------------------------------------------------------
# diagnostics reports


def diagnose(suite, seed=0, output_dir=None):
    """Run a diagnostic suite and write ``diagnose_<suite>_seed<seed>.csv``.

    Returns ``(path, rows)``; each row carries a pass/fail flag and the measured value.
    """
    from .suites import run_suite

    rows = run_suite(suite, seed)
    out = Path(output_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"diagnose_{suite}_seed{int(seed)}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["suite", "check", "measured", "threshold", "passed", "note"])
        for r in rows:
            w.writerow([r.suite, r.check, fmt(r.measured), fmt(r.threshold),
                        "pass" if r.passed else "fail", r.note])
    return path, rows
