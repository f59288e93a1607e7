import math
from fractions import Fraction as F

import numpy as np
import pytest

from _oracles import markov_absorption
from ladderchain.chain import Barriers, make_params
from ladderchain.enumeration import enumerate_exact
from ladderchain.exceptions import InvalidParameterError
from ladderchain.recurrence import closed_form_coefficients
from ladderchain.ruin import (
    FIXED_POINT,
    LINEAR_SOLVE,
    complement_residual,
    iterate_ruin,
    ruin_generations,
    solve_ruin,
)

P0 = math.sqrt(2) - 1
ORACLE_GRID = [(-2, 2), (-3, 2), (-2, 3), (-4, 4)]


@pytest.mark.parametrize("p", [F(1, 4), F(1, 2), F(3, 4)])
@pytest.mark.parametrize("L,U", ORACLE_GRID)
def test_finite_horizon_equals_oracle_exactly(p, L, U):
    params = make_params(2, 2, p)
    b = Barriers(L, U)
    gens = ruin_generations(params, b)
    for k in range(15):
        alpha, beta = next(gens)
        for i, x in enumerate(b.grid()):
            ref = enumerate_exact(params, b, x, k)
            assert alpha[i] == ref.alpha_k
            assert beta[i] == ref.beta_k


@pytest.mark.parametrize("L,U", ORACLE_GRID)
def test_finite_horizon_critical_p_float(L, U):
    params = make_params(2, 2, P0)
    b = Barriers(L, U)
    for k in (0, 1, 2, 5, 11):
        sol = iterate_ruin(params, b, k)
        for x in b.grid():
            ref = enumerate_exact(params, b, x, k)
            a, bb = sol.at(x)
            assert abs(a - ref.alpha_k) < 1e-13
            assert abs(bb - ref.beta_k) < 1e-13


def test_examples():
    params = make_params(2, 2, F(2, 7))
    b = Barriers(-3, 3)
    for k in range(6):
        sol = iterate_ruin(params, b, k)
        assert sol.at(3)[1] == 1
    assert iterate_ruin(params, b, 1).at(2)[1] == F(2, 7)
    assert iterate_ruin(make_params(2, 2, F(1, 2)), Barriers(-2, 2), 2).at(0) == (F(1, 4), F(1, 4))


def test_boundaries_pinned_every_generation():
    params = make_params(2, 2, 0.3)
    gens = ruin_generations(params, Barriers(-5, 4))
    for _ in range(50):
        alpha, beta = next(gens)
        assert (alpha[0], alpha[-1], beta[0], beta[-1]) == (1, 0, 0, 1)


def test_monotone_and_convergent():
    # rational p: monotonicity is checked without rounding
    params = make_params(2, 2, F(1, 2))
    b = Barriers(-4, 4)
    exact = solve_ruin(params, b)
    gens = ruin_generations(params, b)
    prev_a, prev_b = next(gens)
    for _ in range(200):
        a, bb = next(gens)
        assert all(a >= prev_a) and all(bb >= prev_b)
        prev_a, prev_b = a, bb
    assert max(abs(float(u) - v) for u, v in zip(prev_b, exact.beta)) < 1e-8
    assert max(abs(float(u) - v) for u, v in zip(prev_a, exact.alpha)) < 1e-8


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, P0, 0.75, 0.9])
@pytest.mark.parametrize("L,U", [(-4, 4), (-6, 6), (-10, 5), (-2, 7)])
def test_linear_solve_against_markov_chain(p, L, U):
    params = make_params(2, 2, p)
    sol = solve_ruin(params, Barriers(L, U))
    alpha, beta, _ = markov_absorption(params, Barriers(L, U))
    assert np.max(np.abs(sol.alpha - alpha)) < 1e-12
    assert np.max(np.abs(sol.beta - beta)) < 1e-12
    assert sol.residual < 1e-12


@pytest.mark.parametrize("p", [0.2, 0.5, P0, 0.8])
@pytest.mark.parametrize("L,U", [(-4, 4), (-3, 5)])
def test_fixed_point_matches_linear_solve(p, L, U):
    params = make_params(2, 2, p)
    lin = solve_ruin(params, Barriers(L, U), LINEAR_SOLVE)
    fix = solve_ruin(params, Barriers(L, U), FIXED_POINT, tol=1e-10)
    assert fix.method == FIXED_POINT and fix.iterations > 0
    assert np.max(np.abs(fix.alpha - lin.alpha)) < 1e-8
    assert np.max(np.abs(fix.beta - lin.beta)) < 1e-8


def test_stationary_boundaries_and_range():
    for p in (0.1, 0.5, P0, 0.9):
        sol = solve_ruin(make_params(2, 2, p), Barriers(-4, 4))
        assert (sol.alpha[0], sol.beta[-1], sol.alpha[-1], sol.beta[0]) == (1, 1, 0, 0)
        assert np.all((sol.alpha >= -1e-14) & (sol.alpha <= 1 + 1e-14))
        assert np.all((sol.beta >= -1e-14) & (sol.beta <= 1 + 1e-14))


def test_complement_residual():
    sol = solve_ruin(make_params(2, 2, 0.5), Barriers(-4, 4))
    assert complement_residual(sol) < 1e-12
    sol.beta = sol.beta.copy()
    sol.beta[3] += 0.1
    assert abs(complement_residual(sol) - 0.1) < 1e-12
    assert complement_residual(iterate_ruin(make_params(2, 2, 0.5), Barriers(-4, 4), 0)) == 1


def test_critical_linear_solve_matches_closed_form():
    b = Barriers(-6, 6)
    sol = solve_ruin(make_params(2, 2, P0), b)
    closed = closed_form_coefficients(P0, b)
    assert max(abs(u - v) for u, v in zip(sol.beta, closed.profile())) < 1e-10
    far = iterate_ruin(make_params(2, 2, P0), b, 3000)
    assert np.max(np.abs(far.beta - sol.beta)) < 1e-10


def test_nonsingular_on_sweep():
    for p in np.linspace(0.01, 0.99, 50):
        for L, U in [(-2, 2), (-7, 3), (-3, 9)]:
            solve_ruin(make_params(2, 2, float(p)), Barriers(L, U))


def test_rejections():
    with pytest.raises(InvalidParameterError):
        iterate_ruin(make_params(2, 2, 0.5), Barriers(-1, 2), 3)
    with pytest.raises(InvalidParameterError):
        solve_ruin(make_params(3, 2, 0.5), Barriers(-4, 4))
    with pytest.raises(InvalidParameterError):
        solve_ruin(make_params(2, 2, 0.5), Barriers(-4, 4), method="magic")


def test_round_trip_dict():
    from ladderchain.ruin import RuinSolution

    sol = solve_ruin(make_params(2, 2, 0.37), Barriers(-5, 4))
    back = RuinSolution.from_dict(sol.to_dict())
    assert np.array_equal(back.alpha, sol.alpha) and np.array_equal(back.beta, sol.beta)
    assert back.method == sol.method and back.residual == sol.residual
