"""Ruin probabilities, mean durations and recurrence diagnostics for ladder
chains L(r, s, p)."""

from .chain import Barriers, ChainParams, TrialOutcome, WalkState, make_params, run_trial, step
from .duration import DurationSolution, appendix_bound, iterate_duration, solve_duration
from .enumeration import ExactFiniteHorizon, enumerate_exact
from .exceptions import (
    ConsistencyError,
    ConvergenceError,
    InvalidParameterError,
    LadderChainError,
    StreamExhaustedError,
)
from .montecarlo import MCEstimate, estimate_duration, estimate_return_probability, estimate_ruin
from .recurrence import (
    characteristic_roots,
    closed_form_coefficients,
    drift,
    moment_table,
    one_sided_escape,
    recurrence_probe,
)
from .ruin import RuinSolution, complement_residual, iterate_ruin, solve_ruin

__version__ = "0.1.0"
