"""Mean duration m(x) = lim E tau_k^x for L(2, 2, p), with a priori bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _lattice as lat
from .chain import Barriers, ChainParams
from .exceptions import ConsistencyError, ConvergenceError, InvalidParameterError
from .ruin import FINITE_HORIZON, FIXED_POINT, LINEAR_SOLVE, METHODS

CRITICAL_P = math.sqrt(2) - 1
CRITICAL_WINDOW = 1e-12


def duration_rows(params: ChainParams) -> lat.RowConstants:
    p = params.p
    zero = p * 0
    return lat.RowConstants(top=zero + 1, near=1 + p, inner=zero + 1, left=zero, right=zero)


def is_critical(p, window: float = CRITICAL_WINDOW) -> bool:
    return abs(float(p) - CRITICAL_P) <= window


def appendix_bound(params: ChainParams, barriers: Barriers, x) -> float:
    """Upper bound on ``E tau_k^x`` valid for every ``k``.

    Away from the critical probability the bound comes from optional stopping
    applied to the walk itself and blows up like ``1/|p^2 + 2p - 1|`` near
    it; at ``p = sqrt(2) - 1`` a second-moment argument is used instead.
    """
    L, U = barriers.lower, barriers.upper
    if not L <= x <= U:
        raise InvalidParameterError(f"start {x} outside [{L}, {U}]")
    p = float(params.p)
    q = 1.0 - p
    reach = max(abs(L), abs(U))
    if is_critical(p):
        return 2 + 11 * p + (2 * p - q) * reach + ((x + p - q) ** 2 + max(L * L, U * U)) / 2
    drift = p * p + 2 * p - 1
    return 1 + (2 * reach + 2 * abs(p - q) + abs(2 * p - q)) / abs(drift)


@dataclass
class DurationSolution:
    grid: tuple
    m: np.ndarray
    bound: np.ndarray
    method: str
    residual: float
    iterations: Optional[int] = None
    tol: Optional[float] = None
    p: object = field(default=None, repr=False)

    def at(self, x: int):
        return self.m[x - self.grid[0]]

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "m": [float(v) for v in self.m],
            "bound": [float(v) for v in self.bound],
            "method": self.method,
            "iterations": self.iterations,
            "tol": self.tol,
            "residual": float(self.residual),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DurationSolution":
        return cls(
            grid=tuple(data["grid"]),
            m=np.asarray(data["m"], dtype=np.float64),
            bound=np.asarray(data["bound"], dtype=np.float64),
            method=data["method"],
            residual=data["residual"],
            iterations=data.get("iterations"),
            tol=data.get("tol"),
        )


def duration_generations(params: ChainParams, barriers: Barriers) -> Iterator[np.ndarray]:
    """Yield ``m_k`` for ``k = 0, 1, 2, ...``."""
    lat.require_ladder22(params, barriers)
    n = barriers.width
    dtype = lat.dtype_for(params)
    zero = params.p * 0
    rows = duration_rows(params)

    m0 = lat.filled(n + 1, zero, dtype)
    yield m0
    m1 = lat.filled(n + 1, zero + 1, dtype)
    m1[0] = zero
    m1[n] = zero
    yield m1

    g2, g1 = m0, m1
    while True:
        nxt = lat.next_generation(g2, g1, params, rows)
        yield nxt
        g2, g1 = g1, nxt


def _bounds(params, barriers) -> np.ndarray:
    return np.array([appendix_bound(params, barriers, x) for x in barriers.grid()])


def iterate_duration(params: ChainParams, barriers: Barriers, k: int) -> DurationSolution:
    """Exact ``m_k(x) = E tau_k^x`` over the grid."""
    if k < 0:
        raise InvalidParameterError("k must be nonnegative")
    gens = duration_generations(params, barriers)
    for _ in range(k + 1):
        m = next(gens)
    return DurationSolution(
        grid=tuple(barriers.grid()),
        m=m,
        bound=_bounds(params, barriers),
        method=FINITE_HORIZON,
        residual=lat.stationary_residual(m, params, duration_rows(params)),
        iterations=k,
        p=params.p,
    )


def _certify(sol: DurationSolution) -> DurationSolution:
    over = np.asarray(sol.m, dtype=np.float64) - sol.bound
    if np.any(over > 0):
        i = int(np.argmax(over))
        raise ConsistencyError(
            f"mean duration {float(sol.m[i])} at x={sol.grid[i]} exceeds its bound {sol.bound[i]}"
        )
    return sol


def solve_duration(
    params: ChainParams,
    barriers: Barriers,
    method: str = LINEAR_SOLVE,
    tol: float = 1e-10,
    max_iterations: int = lat.ITERATION_CAP,
) -> DurationSolution:
    """Mean duration ``m(x) = lim_k m_k(x)``.

    ``linear_solve`` solves the limit of the finite-horizon recurrence as a
    dense system; ``fixed_point`` iterates the recurrence until the sup-norm
    change drops below ``tol`` and the stationary residual below ``10 * tol``.
    Either result is checked against :func:`appendix_bound`.

    Raises:
        ConsistencyError: on a singular system or a bound violation.
        ConvergenceError: if ``fixed_point`` does not settle in time.
    """
    lat.require_ladder22(params, barriers)
    grid = tuple(barriers.grid())
    fparams = ChainParams(params.r, params.s, float(params.p))
    rows = duration_rows(fparams)
    bound = _bounds(fparams, barriers)
    if method == LINEAR_SOLVE:
        m = lat.solve_stationary(fparams, barriers, rows)
        residual = lat.stationary_residual(m, fparams, rows)
        return _certify(DurationSolution(grid, m, bound, LINEAR_SOLVE, residual, p=params.p))
    if method == FIXED_POINT:
        if not tol > 0:
            raise InvalidParameterError("tol must be positive")
        gens = duration_generations(fparams, barriers)
        prev = next(gens)
        for k in range(1, max_iterations + 1):
            m = next(gens)
            if lat.sup_change(m, prev) < tol:
                residual = lat.stationary_residual(m, fparams, rows)
                if residual < 10 * tol:
                    return _certify(DurationSolution(grid, m, bound, FIXED_POINT, residual, k, tol, p=params.p))
            prev = m
        raise ConvergenceError(f"fixed point not reached within {max_iterations} generations")
    raise InvalidParameterError(f"unknown method {method!r}; expected one of {METHODS[1:]}")
