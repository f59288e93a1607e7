"""Independent reference computations used only by the tests."""

import itertools
from fractions import Fraction

import numpy as np

from ladderchain.chain import CENSORED, LOWER, UPPER, WalkState, run_trial, step


def full_enumeration(params, barriers, x, k):
    """alpha_k, beta_k, E tau_k by running every one of the 2**k sequences
    through run_trial (no pruning)."""
    p = params.p if params.is_exact else Fraction(params.p)
    q = 1 - p
    alpha = beta = tau = Fraction(0)
    for signs in itertools.product((1, -1), repeat=k):
        ups = signs.count(1)
        w = p**ups * q ** (k - ups)
        out = run_trial(params, barriers, x, k, signs)
        tau += w * out.exit_time
        if out.exit_side == LOWER:
            alpha += w
        elif out.exit_side == UPPER:
            beta += w
    return alpha, beta, tau


def markov_absorption(params, barriers):
    """alpha, beta and mean absorption time from an absorbing Markov chain on
    transient states (position, run), started with run 0.

    Positions reachable from [L, U] before absorption lie in L+1..U-1 and runs
    in 0..r-1; absorption happens as soon as the position leaves (L, U).
    """
    L, U = barriers.lower, barriers.upper
    p, q = float(params.p), float(params.q)
    states = [(x, run) for x in range(L + 1, U) for run in range(params.r)]
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    Q = np.zeros((n, n))
    to_lower = np.zeros(n)
    to_upper = np.zeros(n)
    for (x, run), i in index.items():
        for xi, w in ((1, p), (-1, q)):
            nxt = step(params, WalkState(x, run), xi)
            if nxt.position <= L:
                to_lower[i] += w
            elif nxt.position >= U:
                to_upper[i] += w
            else:
                Q[i, index[(nxt.position, nxt.run)]] += w
    fundamental = np.linalg.inv(np.eye(n) - Q)
    a = fundamental @ to_lower
    b = fundamental @ to_upper
    t = fundamental @ np.ones(n)
    alpha = [1.0] + [a[index[(x, 0)]] for x in range(L + 1, U)] + [0.0]
    beta = [0.0] + [b[index[(x, 0)]] for x in range(L + 1, U)] + [1.0]
    m = [0.0] + [t[index[(x, 0)]] for x in range(L + 1, U)] + [0.0]
    return np.array(alpha), np.array(beta), np.array(m)


def increment_law(params, lags):
    """Exact joint law of consecutive increments.

    ``lags=1``: law of X_1.  ``lags=2``: law of (X_1, X_2).  ``lags=3``: law
    of (X_k, X_{k+1}) for k >= 2, via three signs (xi_{k-1}, xi_k, xi_{k+1}).
    Returns ``{increments: probability}``.
    """
    p, q = params.p, params.q
    law = {}
    for signs in itertools.product((1, -1), repeat=lags):
        w = 1
        state = WalkState(0, 0)
        incs = []
        for xi in signs:
            w = w * (p if xi == 1 else q)
            nxt = step(params, state, xi)
            incs.append(nxt.position - state.position)
            state = nxt
        key = tuple(incs[-2:]) if lags == 3 else tuple(incs)
        law[key] = law.get(key, 0) + w
    return law


def moments_from_law(law, i, j):
    e_i = sum(w * k[i] for k, w in law.items())
    e_j = sum(w * k[j] for k, w in law.items())
    e_ij = sum(w * k[i] * k[j] for k, w in law.items())
    return e_ij - e_i * e_j
