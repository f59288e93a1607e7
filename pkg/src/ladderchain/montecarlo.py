"""Reproducible Monte Carlo estimates for any ladder chain L(r, s, p).

Each trial draws its signs from its own Philox stream keyed by
``(seed, trial_index)``.  Trials are processed in fixed-size blocks that may
be spread over worker threads, and all aggregates are integer sums, so a run
is bitwise reproducible from ``(seed, trials, horizon)`` whatever the number
of workers.

Duration estimates are of the truncated mean ``E tau_k^x`` with ``k`` equal
to the horizon: a censored trial contributes the horizon itself.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numba as nb
import numpy as np

from ._philox import check_seed, philox4x64, to_unit
from .chain import Barriers, ChainParams
from .exceptions import InvalidParameterError

BLOCK_TRIALS = 2048
DEFAULT_BARRIER_HORIZON = 10**4
DEFAULT_RETURN_HORIZON = 10**5
MAX_HORIZON = 10**8

# exit codes stored per trial
_CENSORED, _LOWER, _UPPER = 0, 1, 2


@dataclass(frozen=True)
class MCEstimate:
    target: str
    estimate: float
    std_error: float
    trials: int
    censored: int
    horizon: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MCEstimate":
        return cls(**data)

    def z_score(self, exact: float) -> float:
        """Signed distance from ``exact`` in standard errors (inf if the
        estimate has zero spread but misses ``exact``)."""
        gap = self.estimate - exact
        if self.std_error == 0:
            return 0.0 if gap == 0 else math.copysign(math.inf, gap)
        return gap / self.std_error


@nb.njit(nogil=True, cache=True)
def _barrier_kernel(seed, first, count, p, r, s, lower, upper, x, horizon, side, tau):
    k0 = np.uint64(seed)
    zero = np.uint64(0)
    top = r - 1
    for j in range(count):
        k1 = np.uint64(first + j)
        pos = x
        run = 0
        block = zero
        w0 = w1 = w2 = w3 = zero
        used = 4
        outcome = _CENSORED
        t = 0
        if pos <= lower:
            outcome = _LOWER
        elif pos >= upper:
            outcome = _UPPER
        while outcome == _CENSORED and t < horizon:
            if used == 4:
                block += np.uint64(1)
                w0, w1, w2, w3 = philox4x64(block, zero, zero, zero, k0, k1)
                used = 0
            if used == 0:
                w = w0
            elif used == 1:
                w = w1
            elif used == 2:
                w = w2
            else:
                w = w3
            used += 1
            t += 1
            if to_unit(w) < p:
                if run >= top:
                    pos += s
                else:
                    pos += 1
                    run += 1
            else:
                pos -= 1
                run = 0
            if pos <= lower:
                outcome = _LOWER
            elif pos >= upper:
                outcome = _UPPER
        side[j] = outcome
        tau[j] = t


@nb.njit(nogil=True, cache=True)
def _return_kernel(seed, first, count, p, r, s, horizon, hit):
    """``hit[j]`` is the first ``n >= 1`` with ``S_n = 0``, or 0 if there is
    none within the horizon."""
    k0 = np.uint64(seed)
    zero = np.uint64(0)
    top = r - 1
    for j in range(count):
        k1 = np.uint64(first + j)
        pos = 0
        run = 0
        block = zero
        w0 = w1 = w2 = w3 = zero
        used = 4
        found = 0
        t = 0
        while t < horizon:
            if used == 4:
                block += np.uint64(1)
                w0, w1, w2, w3 = philox4x64(block, zero, zero, zero, k0, k1)
                used = 0
            if used == 0:
                w = w0
            elif used == 1:
                w = w1
            elif used == 2:
                w = w2
            else:
                w = w3
            used += 1
            t += 1
            if to_unit(w) < p:
                if run >= top:
                    pos += s
                else:
                    pos += 1
                    run += 1
            else:
                pos -= 1
                run = 0
            if pos == 0:
                found = t
                break
        hit[j] = found


@nb.njit(nogil=True, cache=True)
def _increment_kernel(seed, p, r, s, n, out):
    k0 = np.uint64(seed)
    k1 = np.uint64(0)
    zero = np.uint64(0)
    top = r - 1
    run = 0
    block = zero
    i = 0
    while i < n:
        block += np.uint64(1)
        w0, w1, w2, w3 = philox4x64(block, zero, zero, zero, k0, k1)
        for w in (w0, w1, w2, w3):
            if i >= n:
                break
            if to_unit(w) < p:
                if run >= top:
                    out[i] = s
                else:
                    out[i] = 1
                    run += 1
            else:
                out[i] = -1
                run = 0
            i += 1


def _blocks(trials: int):
    return [(start, min(BLOCK_TRIALS, trials - start)) for start in range(0, trials, BLOCK_TRIALS)]


def _run_blocks(job, trials: int, workers: int) -> None:
    blocks = _blocks(trials)
    if workers <= 1 or len(blocks) == 1:
        for start, count in blocks:
            job(start, count)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for _ in pool.map(lambda b: job(*b), blocks):
            pass


def _check_counts(trials: int, horizon: int, workers: int) -> None:
    if trials < 1:
        raise InvalidParameterError("trials must be at least 1")
    if not 0 <= horizon <= MAX_HORIZON:
        raise InvalidParameterError(f"horizon must be in [0, {MAX_HORIZON}]")
    if workers < 1:
        raise InvalidParameterError("workers must be at least 1")


def simulate_exits(
    params: ChainParams,
    barriers: Barriers,
    x,
    trials: int,
    horizon: int,
    seed: int,
    workers: int = 1,
):
    """Per-trial exit codes (0 censored, 1 lower, 2 upper) and stopped times."""
    _check_counts(trials, horizon, workers)
    seed = check_seed(seed)
    if not barriers.lower <= x <= barriers.upper:
        raise InvalidParameterError(f"start {x} outside [{barriers.lower}, {barriers.upper}]")
    side = np.empty(trials, dtype=np.int8)
    tau = np.empty(trials, dtype=np.int64)
    p = float(params.p)

    def job(start, count):
        _barrier_kernel(
            np.uint64(seed), start, count, p, params.r, params.s,
            float(barriers.lower), float(barriers.upper), float(x), horizon,
            side[start : start + count], tau[start : start + count],
        )

    _run_blocks(job, trials, workers)
    return side, tau


def _binomial(target, hits, trials, censored, horizon, seed) -> MCEstimate:
    est = hits / trials
    return MCEstimate(target, est, math.sqrt(est * (1 - est) / trials), trials, censored, horizon, seed)


def estimate_ruin(
    params: ChainParams,
    barriers: Barriers,
    x,
    trials: int,
    horizon: int = DEFAULT_BARRIER_HORIZON,
    seed: int = 0,
    workers: int = 1,
) -> tuple:
    """Estimate ``(alpha_k(x), beta_k(x))`` with ``k = horizon``.

    Censored trials count towards ``trials`` but towards neither event.
    """
    side, _ = simulate_exits(params, barriers, x, trials, horizon, seed, workers)
    lower = int(np.count_nonzero(side == _LOWER))
    upper = int(np.count_nonzero(side == _UPPER))
    censored = trials - lower - upper
    return (
        _binomial("alpha", lower, trials, censored, horizon, seed),
        _binomial("beta", upper, trials, censored, horizon, seed),
    )


def estimate_duration(
    params: ChainParams,
    barriers: Barriers,
    x,
    trials: int,
    horizon: int = DEFAULT_BARRIER_HORIZON,
    seed: int = 0,
    workers: int = 1,
) -> MCEstimate:
    """Sample mean of the stopped time ``tau_k^x`` with ``k = horizon``."""
    side, tau = simulate_exits(params, barriers, x, trials, horizon, seed, workers)
    total = int(tau.sum())
    total_sq = int(np.dot(tau, tau))
    mean = total / trials
    if trials > 1:
        var = max((total_sq - total * total / trials) / (trials - 1), 0.0)
    else:
        var = 0.0
    censored = int(np.count_nonzero(side == _CENSORED))
    return MCEstimate("duration", mean, math.sqrt(var / trials), trials, censored, horizon, seed)


def return_times(params: ChainParams, horizon: int, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """First return time to 0 per trial (0 where none occurs by ``horizon``)."""
    _check_counts(trials, horizon, workers)
    seed = check_seed(seed)
    hit = np.empty(trials, dtype=np.int64)
    p = float(params.p)

    def job(start, count):
        _return_kernel(np.uint64(seed), start, count, p, params.r, params.s, horizon, hit[start : start + count])

    _run_blocks(job, trials, workers)
    return hit


def return_probability_curve(params: ChainParams, horizons, trials: int, seed: int, workers: int = 1) -> list:
    """``P(T <= N)`` estimates for several horizons from one set of trials.

    The same trajectories serve every horizon, so the curve is monotone by
    construction.
    """
    horizons = [int(h) for h in horizons]
    if not horizons:
        return []
    hit = return_times(params, max(horizons), trials, seed, workers)
    returned = hit[hit > 0]
    out = []
    for h in horizons:
        hits = int(np.count_nonzero(returned <= h))
        out.append(_binomial("return_probability", hits, trials, trials - hits, h, seed))
    return out


def estimate_return_probability(
    params: ChainParams,
    horizon: int = DEFAULT_RETURN_HORIZON,
    trials: int = 10**4,
    seed: int = 0,
    workers: int = 1,
) -> MCEstimate:
    """Estimate ``P(T <= horizon)`` where ``T = inf{n >= 1 : S_n = 0}``.

    The unbounded walk starts at 0 with an empty success run.  Only exact
    visits count: an upward jump of ``s`` may skip over 0.
    """
    return return_probability_curve(params, [horizon], trials, seed, workers)[0]


def simulate_increments(params: ChainParams, n: int, seed: int) -> np.ndarray:
    """One trajectory's increments ``X_1..X_n`` (stream of trial 0)."""
    seed = check_seed(seed)
    out = np.empty(n, dtype=np.int64)
    _increment_kernel(np.uint64(seed), float(params.p), params.r, params.s, n, out)
    return out
