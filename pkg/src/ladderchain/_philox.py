"""Philox4x64-10 counter-based generator, usable inside numba kernels.

The block function reproduces ``numpy.random.Philox`` exactly: a stream with
key ``(k0, k1)`` started at counter zero yields, for block ``j = 1, 2, ...``,
the four words ``philox4x64(j, 0, 0, 0; k0, k1)``.  Trial ``t`` of a run
seeded with ``seed`` uses key ``(seed, t)``, so a trial's signs depend on
nothing but ``(seed, t)``.
"""

import numba as nb
import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0

SEED_LIMIT = 2**64


@nb.njit(inline="always")
def _mulhilo(a, b):
    lo = a * b
    a0 = a & _LO32
    a1 = a >> _S32
    b0 = b & _LO32
    b1 = b >> _S32
    t = a1 * b0 + ((a0 * b0) >> _S32)
    w = (t & _LO32) + a0 * b1
    hi = a1 * b1 + (t >> _S32) + (w >> _S32)
    return hi, lo


@nb.njit(inline="always")
def philox4x64(c0, c1, c2, c3, k0, k1):
    for _ in range(10):
        h0, l0 = _mulhilo(_M0, c0)
        h1, l1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = h1 ^ c1 ^ k0, l1, h0 ^ c3 ^ k1, l0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return c0, c1, c2, c3


@nb.njit(inline="always")
def to_unit(word):
    """Top 53 bits of a 64-bit word as a double in [0, 1)."""
    return (word >> _S11) * _TWO_M53


@nb.njit(nogil=True, cache=True)
def raw_words(seed, trial, n):
    """First ``n`` 64-bit words of trial ``trial``'s stream."""
    out = np.empty(n, dtype=np.uint64)
    k0 = np.uint64(seed)
    k1 = np.uint64(trial)
    zero = np.uint64(0)
    block = np.uint64(0)
    i = 0
    while i < n:
        block += np.uint64(1)
        w0, w1, w2, w3 = philox4x64(block, zero, zero, zero, k0, k1)
        for w in (w0, w1, w2, w3):
            if i < n:
                out[i] = w
                i += 1
    return out


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed
