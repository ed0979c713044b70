"""Payoff-based Nash equilibrium learning in monotone games with Gaussian exploration."""

from .diagnostics import (
    estimate_decomposition,
    estimate_smoothed_cost,
    estimate_smoothed_gradient,
    lemma3_ratio_scan,
    out_of_set_frequency,
)
from .exceptions import (
    DomainError,
    EmptyShrunkSetError,
    InfeasibleSetError,
    NoSolutionError,
    NotMonotoneError,
    NumericalDivergenceError,
    PoisonedStateError,
    ScheduleValidationError,
    UsageError,
)
from .experiment import ExperimentConfig, diagnose, load_config, run_experiment, summarize
from .games import (
    CATALOG,
    GameSpec,
    affine_monotone,
    bilinear_zero_sum,
    check_monotone_sampled,
    cournot,
    cournot_duopoly,
    custom,
    evaluate_cost,
    evaluate_mapping,
    matching_pennies_mixed,
    zero_game,
)
from .learner import BanditLearner, run
from .schedules import ScheduleSpec, summability_probe, validate_exponents, validate_schedule
from .sets import Ball, Box, Free, Polyhedron, ProductSet, Simplex
from .vi import (
    least_norm_affine,
    one_timescale_run,
    regularized_solution,
    solve_strongly_monotone_vi,
    tikhonov_path,
)

__version__ = "0.1.0"
