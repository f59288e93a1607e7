"""Exhaustive finite-horizon oracle.

Every sign sequence of length ``k`` is walked (depth first, pruned at the
first barrier crossing, since later signs cannot change the outcome).  The
leaves are tallied by ``(successes, failures, outcome)`` only, so the
probability of an event is the polynomial ``sum count * p**a * q**b``.  That
polynomial is evaluated exactly: with a rational ``p`` the result is an exact
:class:`~fractions.Fraction`; with a float ``p`` the binary value of ``p`` is
expanded exactly and the final sum is rounded once, so float results are
correctly rounded and independent of any traversal order.  Float results are
compared against other routes with an absolute tolerance of
:data:`FLOAT_TOLERANCE`.

This module deliberately shares nothing with the recurrence solvers except the
stepping rule in :mod:`ladderchain.chain`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .chain import CENSORED, LOWER, UPPER, Barriers, ChainParams, WalkState, step
from .exceptions import InvalidParameterError

MAX_HORIZON = 24
FLOAT_TOLERANCE = 1e-15

Number = Union[Fraction, float]


@dataclass(frozen=True)
class ExactFiniteHorizon:
    """Finite-horizon absorption probabilities and mean stopped time."""

    alpha_k: Number
    beta_k: Number
    mean_tau_k: Number
    total_probability: Number
    k: int
    representation: str  # "exact" or "float"


def _tally(params: ChainParams, barriers: Barriers, x, k: int) -> Counter:
    leaves: Counter = Counter()

    def visit(state: WalkState, depth: int, ups: int):
        side = barriers.side(state.position)
        if side is not None:
            leaves[(ups, depth - ups, side)] += 1
            return
        if depth == k:
            leaves[(ups, depth - ups, CENSORED)] += 1
            return
        visit(step(params, state, 1), depth + 1, ups + 1)
        visit(step(params, state, -1), depth + 1, ups)

    visit(WalkState(x, 0), 0, 0)
    return leaves


def enumerate_exact(
    params: ChainParams,
    barriers: Barriers,
    x,
    k: int,
    *,
    max_horizon: int = MAX_HORIZON,
) -> ExactFiniteHorizon:
    """Exact ``alpha_k(x)``, ``beta_k(x)`` and ``E tau_k^x`` by enumeration.

    Works for any order and step.  ``x`` may be any real in ``[L, U]``.

    Raises:
        InvalidParameterError: if ``k`` is negative or above ``max_horizon``,
            or ``x`` lies outside the barriers.
    """
    if k < 0:
        raise InvalidParameterError("k must be nonnegative")
    if k > max_horizon:
        raise InvalidParameterError(
            f"k={k} exceeds the enumeration cap of {max_horizon} (cost grows like 2**k)"
        )
    if not barriers.lower <= x <= barriers.upper:
        raise InvalidParameterError(f"start {x} outside [{barriers.lower}, {barriers.upper}]")

    exact = params.is_exact
    p = params.p if exact else Fraction(params.p)
    q = 1 - p
    sums = {LOWER: Fraction(0), UPPER: Fraction(0), CENSORED: Fraction(0)}
    tau = Fraction(0)
    for (a, b, side), count in sorted(_tally(params, barriers, x, k).items()):
        weight = count * p**a * q**b
        sums[side] += weight
        tau += weight * (k if side == CENSORED else a + b)
    total = sums[LOWER] + sums[UPPER] + sums[CENSORED]

    conv = (lambda v: v) if exact else float
    return ExactFiniteHorizon(
        alpha_k=conv(sums[LOWER]),
        beta_k=conv(sums[UPPER]),
        mean_tau_k=conv(tau),
        total_probability=conv(total),
        k=k,
        representation="exact" if exact else "float",
    )
