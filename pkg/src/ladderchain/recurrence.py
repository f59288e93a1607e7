"""Characteristic roots, the critical closed form, and recurrence diagnostics
for L(2, 2, p).

Substituting ``beta(x) = lambda**x`` into the interior ruin recurrence gives
the cubic ``p l^3 - pq l^2 + (pq - 1) l + q = (l - 1)(p l^2 + p^2 l - q)``.
At the critical probability ``p0 = sqrt(2) - 1`` (zero stationary drift)
``l = 1`` is a double root and the third root is ``-sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _lattice as lat
from .chain import Barriers, ChainParams, make_params
from .duration import CRITICAL_P
from .exceptions import ConsistencyError, InvalidParameterError
from .montecarlo import DEFAULT_RETURN_HORIZON, MCEstimate, return_probability_curve
from .ruin import beta_rows, solve_ruin

ROOT_MERGE_TOL = 1e-10
CLOSED_FORM_WINDOW = 1e-10
CLOSED_FORM_TOL = 1e-8
# wider intervals are checked on windows next to each barrier and in the middle
FULL_CHECK_WIDTH = 10**5
CHECK_WINDOW = 64
LAMBDA3 = -math.sqrt(2)

CONSISTENT = "consistent with recurrence"
UNCLASSIFIED = "no classification asserted"


def cubic_coefficients(p) -> tuple:
    """Coefficients of the characteristic cubic, highest degree first."""
    q = 1 - p
    return (p, -p * q, p * q - 1, q)


def eval_poly(coefficients, z):
    acc = 0 * z
    for c in coefficients:
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class CharacteristicSpectrum:
    roots: tuple  # distinct roots, ascending
    multiplicities: tuple
    critical: bool
    p: float

    def expanded(self) -> tuple:
        """Coefficients of ``p * prod (l - root)**mult``, highest first."""
        poly = [self.p]
        for root, mult in zip(self.roots, self.multiplicities):
            for _ in range(mult):
                shifted = poly + [0.0]
                for i in range(1, len(shifted)):
                    shifted[i] -= root * poly[i - 1]
                poly = shifted
        return tuple(poly)


def characteristic_roots(p) -> CharacteristicSpectrum:
    """Roots of the characteristic cubic with multiplicities.

    The factor ``p l^2 + p^2 l - q`` is solved with the cancellation-free
    form of the quadratic formula; roots closer than ``1e-10`` are merged.
    """
    p = float(p)
    if not 0 < p < 1:
        raise InvalidParameterError("p must be in (0,1)")
    q = 1 - p
    # p l^2 + p^2 l - q: discriminant p^4 + 4pq > 0, so both roots are real
    disc = math.sqrt(p**4 + 4 * p * q)
    big = -(p * p + disc) / (2 * p)  # the negative root, largest in magnitude
    small = (-q / p) / big
    found = sorted([1.0, big, small])
    roots, mults = [], []
    for r in found:
        if roots and abs(r - roots[-1]) < ROOT_MERGE_TOL:
            mults[-1] += 1
        else:
            roots.append(r)
            mults.append(1)
    critical = any(m > 1 for m in mults)
    return CharacteristicSpectrum(tuple(roots), tuple(mults), critical, p)


@dataclass(frozen=True)
class ClosedFormCoefficients:
    """``beta(x) = c1 + c2 x + c3 lambda3**x`` on ``L <= x <= U-1`` at the
    critical probability, with ``beta(U) = 1``.

    ``c3`` itself may underflow for large ``U``; :meth:`beta` works with the
    rescaled ``c3 * lambda3**(U-1)`` so evaluation stays finite.
    """

    c1: float
    c2: float
    c3: float
    lambda3: float
    p: float
    lower: int
    upper: int
    c3_scaled: float = field(repr=False)
    residual: float = 0.0

    def beta(self, x) -> float:
        if x >= self.upper:
            return 1.0
        return self.c1 + self.c2 * x + self.c3_scaled * self.lambda3 ** (x - self.upper + 1)

    def profile(self) -> list:
        return [self.beta(x) for x in range(self.lower, self.upper + 1)]


def closed_form_coefficients(p, barriers: Barriers) -> ClosedFormCoefficients:
    """Evaluate the critical-case coefficients for barriers ``L < U``.

    All three coefficients share the denominator

        p(q-p) l^L + q(1-2q-p(U-L)) l^(U-3) + (p(U-L)+2q^2-p) l^(U-2)
          + (-p^2(U-L)+2p^2-q) l^(U-1)

    with ``l = -sqrt(2)``; numerators and denominator are divided through by
    ``l^(U-1)`` before evaluation to avoid overflow.  The resulting profile is
    then checked against the rows of the stationary system: all of them when
    ``U - L <= 10**5``, otherwise those in three windows of 64 rows (next to
    each barrier and around the midpoint).

    Raises:
        InvalidParameterError: unless ``|p - (sqrt(2) - 1)| <= 1e-10`` and
            ``U - L >= 4``.
        ConsistencyError: if the reconstructed profile violates a row by
            more than ``1e-8``.
    """
    p = float(p)
    if abs(p - CRITICAL_P) > CLOSED_FORM_WINDOW:
        raise InvalidParameterError(
            f"closed form only holds at the critical probability sqrt(2)-1, got p={p}"
        )
    L, U = barriers.lower, barriers.upper
    if barriers.width < lat.MIN_WIDTH:
        raise InvalidParameterError(f"closed form needs U-L >= {lat.MIN_WIDTH}")
    q = 1 - p
    lam = LAMBDA3
    w = U - L
    inv1, inv2 = 1 / lam, 1 / (lam * lam)
    tail = lam ** (L - U + 1)
    denom = p * (q - p) * tail + q * (1 - 2 * q - p * w) * inv2 + (p * w + 2 * q * q - p) * inv1 + (-p * p * w + 2 * p * p - q)
    c1 = (p * p * L - p * L * inv1 + p * q * L * inv2 + p * (q - p) * tail) / denom
    c2 = (-p * p + p * inv1 - p * q * inv2) / denom
    c3_scaled = p * (p - q) / denom
    c3 = c3_scaled * lam ** (-(U - 1))

    coeffs = ClosedFormCoefficients(c1, c2, c3, lam, p, L, U, c3_scaled)
    params = ChainParams(2, 2, p)
    if w <= FULL_CHECK_WIDTH:
        residual = lat.stationary_residual(coeffs.profile(), params, beta_rows(params))
    else:
        residual = _window_residual(coeffs, params)
    if residual > CLOSED_FORM_TOL:
        raise ConsistencyError(f"closed form violates the ruin equations by {residual:.3e}")
    return ClosedFormCoefficients(c1, c2, c3, lam, p, L, U, c3_scaled, residual)


def _window_residual(coeffs: ClosedFormCoefficients, params: ChainParams) -> float:
    L, U = coeffs.lower, coeffs.upper
    n = CHECK_WINDOW
    rows_c = beta_rows(params)
    worst = 0.0
    for a in (L, L + (U - L) // 2 - n // 2, U - n):
        v = np.array([coeffs.beta(x) for x in range(a, a + n + 1)])
        rows = v - lat.next_generation(v, v, params, rows_c)
        # on a window the first row and the last three follow the real system
        # only when they sit on the matching barrier
        lo = 0 if a == L else 1
        hi = n + 1 if a + n == U else n - 2
        worst = max(worst, float(np.max(np.abs(rows[lo:hi]))))
    return worst


def one_sided_escape(p, x: int, direction: str, barrier_sequence: Sequence[int]) -> list:
    """Ruin probabilities as one barrier is pushed towards infinity.

    ``direction="up"``: ``beta(0)`` with ``U = x`` for each ``L`` in the
    sequence.  ``direction="down"``: ``alpha(0)`` with ``L = -x`` for each
    ``U``.  Returns ``[(barrier, probability), ...]``.
    """
    if x < 1 or int(x) != x:
        raise InvalidParameterError("x must be a positive integer")
    seq = [int(b) for b in barrier_sequence]
    if direction == "up":
        steps_ok = all(b2 < b1 for b1, b2 in zip(seq, seq[1:]))
        make = lambda b: Barriers(b, x)
    elif direction == "down":
        steps_ok = all(b2 > b1 for b1, b2 in zip(seq, seq[1:]))
        make = lambda b: Barriers(-x, b)
    else:
        raise InvalidParameterError(f"direction must be 'up' or 'down', got {direction!r}")
    if not steps_ok:
        raise InvalidParameterError("barrier sequence must diverge strictly in the removed direction")
    params = make_params(2, 2, p)
    out = []
    for b in seq:
        sol = solve_ruin(params, make(b))
        a0, b0 = sol.at(0)
        out.append((b, float(b0 if direction == "up" else a0)))
    return out


def drift(p):
    """Stationary mean increment ``E X_k = p^2 + 2p - 1`` (``k >= 2``)."""
    return p * p + 2 * p - 1


@dataclass(frozen=True)
class MomentTable:
    var_x1: object
    var_xk: object
    cov_x1_x2: object
    cov_adjacent: object


def critical_moment_forms(p) -> MomentTable:
    """Simplified moments that hold only at ``p = sqrt(2) - 1``."""
    return MomentTable(12 * p - 4, 4 - 6 * p, 6 - 14 * p, 3 * p - 1)


def moment_table(p) -> MomentTable:
    """Variances and lag-one covariances of the increments of L(2, 2, p).

    Valid for every ``p``; exact when ``p`` is a Fraction.  At the critical
    probability the values are also checked against
    :func:`critical_moment_forms`.
    """
    q = 1 - p
    d = drift(p)
    mean1 = p - q
    table = MomentTable(
        var_x1=4 * p * q,
        var_xk=q + 4 * p * p + p * q - d * d,
        cov_x1_x2=2 * p * p + q * q - 2 * p * q - mean1 * d,
        cov_adjacent=4 * p**3 + q * q - p * q - p * q * q - d * d,
    )
    if not isinstance(p, Fraction) and abs(float(p) - CRITICAL_P) <= 1e-12:
        simple = critical_moment_forms(p)
        for name in ("var_x1", "var_xk", "cov_x1_x2", "cov_adjacent"):
            if abs(getattr(table, name) - getattr(simple, name)) > 1e-12:
                raise ConsistencyError(f"{name} disagrees with its critical-case form")
    return table


def critical_second_moment(p, x, n: int):
    """``E (x + S_n)^2 = 8 + 2n - 22p + (x + p - q)^2`` at the critical
    probability (``n >= 2``)."""
    q = 1 - p
    return 8 + 2 * n - 22 * p + (x + p - q) ** 2


@dataclass
class ProbeReport:
    p: float
    drift: float
    horizons: list
    estimates: list
    nondecreasing: bool
    classification: str

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "drift": self.drift,
            "horizons": list(self.horizons),
            "estimates": [e.to_dict() for e in self.estimates],
            "nondecreasing": self.nondecreasing,
            "classification": self.classification,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProbeReport":
        return cls(
            p=data["p"],
            drift=data["drift"],
            horizons=list(data["horizons"]),
            estimates=[MCEstimate.from_dict(e) for e in data["estimates"]],
            nondecreasing=data["nondecreasing"],
            classification=data["classification"],
        )


def is_nondecreasing(estimates: Sequence[MCEstimate], slack: float = 2.0) -> bool:
    """Each estimate is at least the previous one minus ``slack`` standard
    errors (the larger of the two)."""
    for a, b in zip(estimates, estimates[1:]):
        if b.estimate < a.estimate - slack * max(a.std_error, b.std_error):
            return False
    return True


def recurrence_probe(
    p,
    horizons: Sequence[int] = (10**2, 10**3, 10**4, DEFAULT_RETURN_HORIZON),
    trials: int = 10**4,
    seed: int = 0,
    workers: int = 1,
    r: int = 2,
    s: int = 2,
) -> ProbeReport:
    """Simulated return probabilities ``P(T <= N)`` plus the drift.

    Only the zero-drift case with return probabilities climbing towards 1 is
    labelled; the probe never claims transience.
    """
    params = make_params(r, s, p)
    horizons = sorted(int(h) for h in horizons)
    estimates = return_probability_curve(params, horizons, trials, seed, workers)
    mu = float(drift(float(params.p)))
    rising = is_nondecreasing(estimates)
    zero_drift = r == 2 and s == 2 and abs(mu) < 1e-12
    climbing = len(estimates) >= 2 and estimates[-1].estimate > estimates[0].estimate
    label = CONSISTENT if zero_drift and rising and climbing else UNCLASSIFIED
    return ProbeReport(float(params.p), mu, horizons, estimates, rising, label)
