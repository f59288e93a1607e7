import math
from fractions import Fraction as F

import numpy as np
import pytest

from _oracles import markov_absorption
from ladderchain.chain import Barriers, make_params
from ladderchain.duration import (
    DurationSolution,
    appendix_bound,
    duration_generations,
    iterate_duration,
    solve_duration,
)
from ladderchain.enumeration import enumerate_exact
from ladderchain.ruin import FIXED_POINT, LINEAR_SOLVE

P0 = math.sqrt(2) - 1


@pytest.mark.parametrize("p", [F(1, 4), F(1, 2), F(3, 4)])
@pytest.mark.parametrize("L,U", [(-2, 2), (-3, 2), (-2, 3), (-4, 4)])
def test_finite_horizon_equals_oracle_exactly(p, L, U):
    params = make_params(2, 2, p)
    b = Barriers(L, U)
    gens = duration_generations(params, b)
    for k in range(15):
        m = next(gens)
        for i, x in enumerate(b.grid()):
            assert m[i] == enumerate_exact(params, b, x, k).mean_tau_k


def test_examples():
    for p in (F(1, 5), 0.7):
        sol = iterate_duration(make_params(2, 2, p), Barriers(-3, 3), 1)
        assert sol.at(2) == 1
        for k in (0, 4, 9):
            assert iterate_duration(make_params(2, 2, p), Barriers(-3, 3), k).at(-3) == 0
    assert iterate_duration(make_params(2, 2, F(1, 2)), Barriers(-2, 2), 2).at(0) == 2


@pytest.mark.parametrize("p,slack", [(F(3, 10), 0), (F(1, 2), 0), (P0, 1e-12)])
def test_monotone_and_bounded(p, slack):
    # exact for rational p; the irrational critical p allows round-off slack
    params = make_params(2, 2, p)
    b = Barriers(-4, 4)
    bound = [appendix_bound(params, b, x) for x in b.grid()]
    gens = duration_generations(params, b)
    prev = next(gens)
    for _ in range(150):
        cur = next(gens)
        assert all(c >= v - slack for c, v in zip(cur, prev))
        assert all(c <= u for c, u in zip(cur, bound))
        prev = cur


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, P0, 0.7, 0.9])
@pytest.mark.parametrize("L,U", [(-4, 4), (-6, 6), (-10, 5)])
def test_linear_solve_against_markov_chain(p, L, U):
    params = make_params(2, 2, p)
    sol = solve_duration(params, Barriers(L, U))
    _, _, m = markov_absorption(params, Barriers(L, U))
    assert np.max(np.abs(sol.m - m)) < 1e-10
    assert sol.m[0] == sol.m[-1] == 0
    assert np.all(sol.m[1:-1] >= 1)
    assert np.all(sol.m <= sol.bound)


@pytest.mark.parametrize("p", [0.2, 0.5, P0])
def test_fixed_point_matches_linear_solve(p):
    params = make_params(2, 2, p)
    b = Barriers(-4, 4)
    lin = solve_duration(params, b, LINEAR_SOLVE)
    fix = solve_duration(params, b, FIXED_POINT, tol=1e-10)
    assert np.max(np.abs(lin.m - fix.m)) < 1e-8


def test_half_duration_bound_example():
    params = make_params(2, 2, 0.5)
    b = Barriers(-4, 4)
    sol = solve_duration(params, b)
    assert sol.m[0] == sol.m[-1] == 0 and np.all(sol.m[1:-1] > 0)
    assert sol.at(0) <= 35


def test_appendix_bound_values():
    b = Barriers(-4, 4)
    half = make_params(2, 2, 0.5)
    assert all(appendix_bound(half, b, x) == 35.0 for x in b.grid())
    crit = make_params(2, 2, P0)
    p, q = P0, 1 - P0
    assert appendix_bound(crit, b, 0) == pytest.approx(2 + 11 * p + (2 * p - q) * 4 + ((p - q) ** 2 + 16) / 2, abs=1e-12)
    for sign in (1, -1):
        near = make_params(2, 2, P0 + sign * 1e-6)
        value = appendix_bound(near, b, 0)
        assert math.isfinite(value) and value > 1e6


def test_round_trip_dict():
    sol = solve_duration(make_params(2, 2, 0.6), Barriers(-4, 5))
    back = DurationSolution.from_dict(sol.to_dict())
    assert np.array_equal(back.m, sol.m) and np.array_equal(back.bound, sol.bound)
