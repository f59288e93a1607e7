"""Ruin probabilities alpha(x) (exit through L) and beta(x) (exit through U)
for L(2, 2, p).

Three routes are offered: the exact finite-horizon recurrence
(:func:`iterate_ruin`), its fixed point, and a direct solve of the stationary
boundary-value system.  With a rational ``p`` the finite-horizon route is
exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _lattice as lat
from .chain import Barriers, ChainParams
from .exceptions import ConvergenceError, InvalidParameterError

FINITE_HORIZON = "finite_horizon"
FIXED_POINT = "fixed_point"
LINEAR_SOLVE = "linear_solve"
METHODS = (FINITE_HORIZON, FIXED_POINT, LINEAR_SOLVE)


def alpha_rows(params: ChainParams) -> lat.RowConstants:
    zero = params.p * 0
    return lat.RowConstants(top=zero, near=zero, inner=zero, left=zero + 1, right=zero)


def beta_rows(params: ChainParams) -> lat.RowConstants:
    p = params.p
    zero = p * 0
    return lat.RowConstants(top=p, near=p * p, inner=zero, left=zero, right=zero + 1)


@dataclass
class RuinSolution:
    """alpha and beta on the grid ``L..U`` together with how they were
    obtained.  ``iterations`` is the horizon ``k`` for finite-horizon results
    and the generation count for fixed-point results."""

    grid: tuple
    alpha: np.ndarray
    beta: np.ndarray
    method: str
    residual: float
    iterations: Optional[int] = None
    tol: Optional[float] = None
    p: object = field(default=None, repr=False)

    def at(self, x: int) -> tuple:
        i = x - self.grid[0]
        return self.alpha[i], self.beta[i]

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "alpha": [float(v) for v in self.alpha],
            "beta": [float(v) for v in self.beta],
            "method": self.method,
            "iterations": self.iterations,
            "tol": self.tol,
            "residual": float(self.residual),
            "complement_residual": complement_residual(self),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RuinSolution":
        return cls(
            grid=tuple(data["grid"]),
            alpha=np.asarray(data["alpha"], dtype=np.float64),
            beta=np.asarray(data["beta"], dtype=np.float64),
            method=data["method"],
            residual=data["residual"],
            iterations=data.get("iterations"),
            tol=data.get("tol"),
        )


def ruin_generations(params: ChainParams, barriers: Barriers) -> Iterator[tuple]:
    """Yield ``(alpha_k, beta_k)`` for ``k = 0, 1, 2, ...`` indefinitely.

    Generations 0 and 1 come straight from the definitions (barrier
    indicator; one +-1 step with an empty success run); later ones from the
    two-lag recurrence.
    """
    lat.require_ladder22(params, barriers)
    n = barriers.width
    dtype = lat.dtype_for(params)
    p, q = params.p, params.q
    zero = p * 0
    arows, brows = alpha_rows(params), beta_rows(params)

    a0 = lat.filled(n + 1, zero, dtype)
    b0 = lat.filled(n + 1, zero, dtype)
    a0[0] = zero + 1
    b0[n] = zero + 1
    yield a0, b0

    a1, b1 = a0.copy(), b0.copy()
    a1[1] = q
    b1[n - 1] = p
    yield a1, b1

    a2, a1_ = a0, a1
    b2, b1_ = b0, b1
    while True:
        a_next = lat.next_generation(a2, a1_, params, arows)
        b_next = lat.next_generation(b2, b1_, params, brows)
        yield a_next, b_next
        a2, a1_ = a1_, a_next
        b2, b1_ = b1_, b_next


def _residual(alpha, beta, params) -> float:
    return max(
        lat.stationary_residual(alpha, params, alpha_rows(params)),
        lat.stationary_residual(beta, params, beta_rows(params)),
    )


def iterate_ruin(params: ChainParams, barriers: Barriers, k: int) -> RuinSolution:
    """Exact ``alpha_k`` and ``beta_k`` over the grid.

    ``residual`` reports how far generation ``k`` is from satisfying the
    stationary equations, which shrinks to zero as ``k`` grows.
    """
    if k < 0:
        raise InvalidParameterError("k must be nonnegative")
    gens = ruin_generations(params, barriers)
    for _ in range(k + 1):
        alpha, beta = next(gens)
    return RuinSolution(
        grid=tuple(barriers.grid()),
        alpha=alpha,
        beta=beta,
        method=FINITE_HORIZON,
        residual=_residual(alpha, beta, params),
        iterations=k,
        p=params.p,
    )


def solve_ruin(
    params: ChainParams,
    barriers: Barriers,
    method: str = LINEAR_SOLVE,
    tol: float = 1e-10,
    max_iterations: int = lat.ITERATION_CAP,
) -> RuinSolution:
    """Limiting ruin probabilities ``alpha = lim alpha_k``, ``beta = lim beta_k``.

    ``linear_solve`` solves the stationary system directly.  ``fixed_point``
    runs the finite-horizon recurrence (in floating point) until the sup-norm
    change between generations drops below ``tol`` and the stationary
    residual below ``10 * tol``.

    Raises:
        ConsistencyError: if the stationary system is singular.
        ConvergenceError: if ``fixed_point`` does not settle within
            ``max_iterations`` generations.
    """
    lat.require_ladder22(params, barriers)
    grid = tuple(barriers.grid())
    fparams = ChainParams(params.r, params.s, float(params.p))
    if method == LINEAR_SOLVE:
        alpha = lat.solve_stationary(fparams, barriers, alpha_rows(fparams))
        beta = lat.solve_stationary(fparams, barriers, beta_rows(fparams))
        return RuinSolution(grid, alpha, beta, LINEAR_SOLVE, _residual(alpha, beta, fparams), p=params.p)
    if method == FIXED_POINT:
        if not tol > 0:
            raise InvalidParameterError("tol must be positive")
        gens = ruin_generations(fparams, barriers)
        prev_a, prev_b = next(gens)
        for k in range(1, max_iterations + 1):
            alpha, beta = next(gens)
            change = max(lat.sup_change(alpha, prev_a), lat.sup_change(beta, prev_b))
            if change < tol:
                residual = _residual(alpha, beta, fparams)
                if residual < 10 * tol:
                    return RuinSolution(grid, alpha, beta, FIXED_POINT, residual, k, tol, p=params.p)
            prev_a, prev_b = alpha, beta
        raise ConvergenceError(f"fixed point not reached within {max_iterations} generations")
    raise InvalidParameterError(f"unknown method {method!r}; expected one of {METHODS[1:]}")


def complement_residual(solution: RuinSolution) -> float:
    """``max_x |alpha(x) + beta(x) - 1|``."""
    a = np.asarray(solution.alpha, dtype=np.float64)
    b = np.asarray(solution.beta, dtype=np.float64)
    return float(np.max(np.abs(a + b - 1.0)))
