"""Shared machinery for the L(2, 2, p) boundary-value recurrences.

Ruin probabilities and mean durations satisfy recurrences of one common shape
on the grid ``x = L..U`` (index ``i = x - L``, ``n = U - L``)::

    v(U-1) = c_top   + q v(U-2)
    v(U-2) = c_near  + pq v(U-2) + q v(U-3)
    v(x)   = c_inner + pq v(x) + p v(x+2) - pq v(x+1) + q v(x-1),  L < x < U-2

with Dirichlet values at ``L`` and ``U``.  In the finite-horizon form the
``pq`` terms are read at generation ``k-2`` and the others at ``k-1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import Barriers, ChainParams
from .exceptions import ConsistencyError, InvalidParameterError

MIN_WIDTH = 4
ITERATION_CAP = 10**6


@dataclass(frozen=True)
class RowConstants:
    top: object
    near: object
    inner: object
    left: object
    right: object


def require_ladder22(params: ChainParams, barriers: Barriers) -> None:
    if params.r != 2 or params.s != 2:
        raise InvalidParameterError(
            f"exact solvers cover L(2,2,p) only, got r={params.r}, s={params.s}"
        )
    if barriers.width < MIN_WIDTH:
        raise InvalidParameterError(
            f"exact solvers need U-L >= {MIN_WIDTH}, got {barriers.width}"
        )


def dtype_for(params: ChainParams):
    return object if params.is_exact else np.float64


def filled(n: int, value, dtype) -> np.ndarray:
    out = np.empty(n, dtype=dtype)
    out[:] = [value] * n if dtype is object else value
    return out


def next_generation(g2: np.ndarray, g1: np.ndarray, params: ChainParams, c: RowConstants) -> np.ndarray:
    """Generation ``k`` from generations ``k-2`` (g2) and ``k-1`` (g1)."""
    p, q = params.p, params.q
    pq = p * q
    n = len(g1) - 1
    out = np.empty_like(g1)
    out[0] = c.left
    out[n] = c.right
    out[n - 1] = c.top + q * g1[n - 2]
    out[n - 2] = c.near + pq * g2[n - 2] + q * g1[n - 3]
    out[1 : n - 2] = c.inner + pq * g2[1 : n - 2] + p * g1[3:n] - pq * g2[2 : n - 1] + q * g1[0 : n - 3]
    return out


def stationary_operator(params: ChainParams, n: int) -> np.ndarray:
    """Matrix ``T`` with the stationary equations reading ``v = c + T v`` on
    interior rows (boundary rows of ``T`` are zero)."""
    p, q = float(params.p), float(params.q)
    pq = p * q
    T = np.zeros((n + 1, n + 1))
    T[n - 1, n - 2] = q
    T[n - 2, n - 2] = pq
    T[n - 2, n - 3] = q
    for i in range(1, n - 2):
        T[i, i] += pq
        T[i, i + 2] += p
        T[i, i + 1] -= pq
        T[i, i - 1] += q
    return T


def constant_vector(c: RowConstants, n: int) -> np.ndarray:
    const = np.full(n + 1, float(c.inner))
    const[n - 1] = float(c.top)
    const[n - 2] = float(c.near)
    const[0] = 0.0
    const[n] = 0.0
    return const


def stationary_residual(v: np.ndarray, params: ChainParams, c: RowConstants) -> float:
    """Max violation of the stationary equations, boundary pins included."""
    v = np.asarray(v, dtype=np.float64)
    fparams = ChainParams(params.r, params.s, float(params.p))
    c = RowConstants(*(float(getattr(c, f)) for f in ("top", "near", "inner", "left", "right")))
    # the stationary rows are the two-lag recurrence with both lags equal to v
    rows = v - next_generation(v, v, fparams, c)
    return float(np.max(np.abs(rows)))


def solve_stationary(params: ChainParams, barriers: Barriers, c: RowConstants) -> np.ndarray:
    """Direct dense solve (LU with partial pivoting) of the stationary system."""
    n = barriers.width
    T = stationary_operator(params, n)
    const = constant_vector(c, n)
    inner = slice(1, n)
    A = np.eye(n - 1) - T[inner, inner]
    b = const[inner] + T[inner, 0] * float(c.left) + T[inner, n] * float(c.right)
    try:
        interior = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ConsistencyError(
            f"stationary system singular for p={params.p}, L={barriers.lower}, U={barriers.upper}"
        ) from exc
    v = np.empty(n + 1)
    v[0] = float(c.left)
    v[n] = float(c.right)
    v[inner] = interior
    return v


def sup_change(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))))


