"""Ladder chain L(r, s, p): parameters, the stepping rule and trajectories.

A ladder chain is the partial-sum process of increments

    X_k = -1  if xi_k = -1
    X_k = s   if xi_k = xi_{k-1} = ... = xi_{k-r+1} = +1
    X_k = 1   otherwise

with xi_k i.i.d., P(xi = +1) = p.  The only memory needed is the length of
the current run of successes, capped at r - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Union

from .exceptions import InvalidParameterError, StreamExhaustedError

Probability = Union[float, Fraction]

LOWER = "lower"
UPPER = "upper"
CENSORED = "censored"
ExitSide = Literal["lower", "upper", "censored"]


def parse_probability(value) -> Probability:
    """Coerce ``value`` to a probability.

    Strings of the form ``"a/b"`` (and ints/Fractions) become exact
    :class:`~fractions.Fraction` values so that downstream solvers can run in
    rational arithmetic; anything else becomes a float.

    >>> parse_probability("1/4")
    Fraction(1, 4)
    >>> parse_probability("0.25")
    0.25
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidParameterError(f"not a probability: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            try:
                return Fraction(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidParameterError(f"cannot parse probability {value!r}") from exc
        try:
            return float(text)
        except ValueError as exc:
            raise InvalidParameterError(f"cannot parse probability {value!r}") from exc
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidParameterError(f"cannot parse probability {value!r}") from exc


@dataclass(frozen=True)
class ChainParams:
    """Order ``r``, step ``s`` and success probability ``p`` of L(r, s, p).

    Construct through :func:`make_params`, which validates the fields.
    """

    r: int
    s: int
    p: Probability

    @property
    def q(self) -> Probability:
        return 1 - self.p

    @property
    def is_exact(self) -> bool:
        """True when ``p`` is rational, so solvers can run without rounding."""
        return isinstance(self.p, Fraction)


def make_params(r: int = 2, s: int = 2, p: Probability = 0.5) -> ChainParams:
    """Validate and build :class:`ChainParams`.

    Raises:
        InvalidParameterError: if ``p`` is not strictly inside (0, 1) or
            ``r < 2`` or ``s < 2``.
    """
    p = parse_probability(p)
    if isinstance(p, float) and not math.isfinite(p):
        raise InvalidParameterError("p must be in (0,1)")
    if not 0 < p < 1:
        raise InvalidParameterError("p must be in (0,1)")
    if isinstance(r, bool) or int(r) != r or r < 2:
        raise InvalidParameterError(f"r must be an integer >= 2, got {r!r}")
    if isinstance(s, bool) or int(s) != s or s < 2:
        raise InvalidParameterError(f"s must be an integer >= 2, got {s!r}")
    return ChainParams(int(r), int(s), p)


@dataclass(frozen=True)
class WalkState:
    position: float
    run: int = 0


@dataclass(frozen=True)
class Barriers:
    """Absorbing barriers: the walk stops once ``position <= lower`` or
    ``position >= upper``."""

    lower: int
    upper: int

    def __post_init__(self):
        if int(self.lower) != self.lower or int(self.upper) != self.upper:
            raise InvalidParameterError("barriers must be integers")
        if self.lower >= self.upper:
            raise InvalidParameterError(
                f"lower barrier must be below upper barrier, got L={self.lower}, U={self.upper}"
            )

    @property
    def width(self) -> int:
        return self.upper - self.lower

    def grid(self) -> range:
        return range(self.lower, self.upper + 1)

    def side(self, position) -> ExitSide | None:
        if position <= self.lower:
            return LOWER
        if position >= self.upper:
            return UPPER
        return None


@dataclass(frozen=True)
class TrialOutcome:
    exit_side: ExitSide
    exit_time: int
    exit_position: float


def step(params: ChainParams, state: WalkState, xi: int) -> WalkState:
    """Advance the walk by one sign ``xi`` in {-1, +1}."""
    if xi == -1:
        return WalkState(state.position - 1, 0)
    if xi != 1:
        raise InvalidParameterError(f"sign must be +1 or -1, got {xi!r}")
    top = params.r - 1
    if state.run >= top:
        return WalkState(state.position + params.s, top)
    return WalkState(state.position + 1, state.run + 1)


def run_trial(
    params: ChainParams,
    barriers: Barriers,
    x,
    horizon: int,
    xi_stream: Iterable[int],
) -> TrialOutcome:
    """Run one stopped trajectory from ``x`` on a fixed sign sequence.

    The walk starts with an empty success run.  If ``x`` already lies on or
    beyond a barrier the trial ends at time 0.  Otherwise it stops at the
    first barrier crossing, or is censored after ``horizon`` steps.

    Raises:
        StreamExhaustedError: if ``xi_stream`` runs out before the trial ends.
    """
    if horizon < 0:
        raise InvalidParameterError("horizon must be nonnegative")
    state = WalkState(x, 0)
    side = barriers.side(x)
    if side is not None:
        return TrialOutcome(side, 0, x)
    signs = iter(xi_stream)
    for t in range(1, horizon + 1):
        try:
            xi = next(signs)
        except StopIteration:
            raise StreamExhaustedError(
                f"sign stream exhausted after {t - 1} of {horizon} steps"
            ) from None
        state = step(params, state, xi)
        side = barriers.side(state.position)
        if side is not None:
            return TrialOutcome(side, t, state.position)
    return TrialOutcome(CENSORED, horizon, state.position)
