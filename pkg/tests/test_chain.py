import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ladderchain.chain import (
    CENSORED,
    LOWER,
    UPPER,
    Barriers,
    WalkState,
    make_params,
    parse_probability,
    run_trial,
    step,
)
from ladderchain.exceptions import InvalidParameterError, StreamExhaustedError

signs = st.lists(st.sampled_from([1, -1]), max_size=200)


def test_make_params_basic():
    params = make_params(2, 2, 0.5)
    assert (params.r, params.s, params.p, params.q) == (2, 2, 0.5, 0.5)


def test_make_params_critical():
    p = math.sqrt(2) - 1
    params = make_params(2, 2, p)
    assert params.q == 1 - p
    assert abs(params.q - (2 - math.sqrt(2))) < 1e-15


def test_make_params_rational_keeps_exact_q():
    params = make_params(2, 2, "1/3")
    assert params.p == Fraction(1, 3)
    assert params.q == Fraction(2, 3)
    assert params.is_exact


@pytest.mark.parametrize("p", [1.0, 0.0, -0.2, 1.5, float("nan"), "3/2"])
def test_degenerate_probability_rejected(p):
    with pytest.raises(InvalidParameterError, match=r"p must be in \(0,1\)"):
        make_params(2, 2, p)


@pytest.mark.parametrize("r,s", [(1, 2), (2, 1), (0, 3), (2, 0)])
def test_small_order_or_step_rejected(r, s):
    with pytest.raises(InvalidParameterError):
        make_params(r, s, 0.5)


def test_parse_probability_forms():
    assert parse_probability("1/2") == Fraction(1, 2)
    assert parse_probability(" 0.25 ") == 0.25
    with pytest.raises(InvalidParameterError):
        parse_probability("one half")


def test_barriers_ordered():
    with pytest.raises(InvalidParameterError):
        Barriers(3, 3)
    assert list(Barriers(-1, 1).grid()) == [-1, 0, 1]


@pytest.mark.parametrize(
    "state,xi,expected",
    [
        (WalkState(5, 1), 1, WalkState(7, 1)),
        (WalkState(5, 0), 1, WalkState(6, 1)),
        (WalkState(5, 0), -1, WalkState(4, 0)),
        (WalkState(5, 1), -1, WalkState(4, 0)),
    ],
)
def test_step_ladder22(state, xi, expected):
    assert step(make_params(2, 2, 0.5), state, xi) == expected


def test_step_general_order():
    params = make_params(3, 5, 0.5)
    state = WalkState(0, 0)
    positions = []
    for _ in range(4):
        state = step(params, state, 1)
        positions.append(state.position)
    # third consecutive success is the first ladder step
    assert positions == [1, 2, 7, 12]
    assert state.run == 2


@given(signs, st.integers(2, 5), st.integers(2, 6))
def test_run_stays_in_range_and_increments_allowed(stream, r, s):
    params = make_params(r, s, 0.5)
    state = WalkState(0, 0)
    for xi in stream:
        nxt = step(params, state, xi)
        assert 0 <= nxt.run <= r - 1
        assert nxt.position - state.position in (-1, 1, s)
        state = nxt


def test_run_trial_examples():
    params = make_params(2, 2, 0.5)
    b = Barriers(-2, 2)
    out = run_trial(params, b, 0, 2, [1, 1])
    assert (out.exit_side, out.exit_time, out.exit_position) == (UPPER, 2, 3)
    out = run_trial(params, b, 2, 5, [])
    assert (out.exit_side, out.exit_time, out.exit_position) == (UPPER, 0, 2)
    out = run_trial(params, b, 0, 1, [1])
    assert (out.exit_side, out.exit_time, out.exit_position) == (CENSORED, 1, 1)


def test_run_trial_short_stream():
    with pytest.raises(StreamExhaustedError):
        run_trial(make_params(2, 2, 0.5), Barriers(-5, 5), 0, 3, [1, -1])


@given(signs, st.integers(-6, -1), st.integers(1, 6), st.data())
def test_ladder22_exit_positions(stream, L, U, data):
    params = make_params(2, 2, 0.5)
    x = data.draw(st.integers(L, U))
    out = run_trial(params, Barriers(L, U), x, len(stream), stream)
    if out.exit_side == LOWER:
        assert out.exit_position == L
    elif out.exit_side == UPPER:
        assert out.exit_position in (U, U + 1)
    else:
        assert out.exit_time == len(stream)
    assert run_trial(params, Barriers(L, U), x, len(stream), stream) == out
