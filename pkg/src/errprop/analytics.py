"""Closed-form predictions for the depolarized fraction and the ones chain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from errprop.chain import Arch
from errprop.errors import ScopeError, ValidationError

ONE_D_SATURATION = 5.0 / 3.0  # shallow iff D <= (5/3) n
TWO_D_SATURATION = 3.226  # shallow iff D <= 3.226 sqrt(n)
NONLOCAL_KAPPA = 2.0  # shallow iff D <= kappa * log2(n); a label only

_UP = Fraction(16, 25)
_DOWN = Fraction(1, 25)
_STAY = Fraction(8, 25)


class Regime(str, Enum):
    SHALLOW = "shallow"
    DEEP = "deep"


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")


def _one_minus_power(base: float, exponent: float) -> float:
    # 1 - base**exponent without cancellation for base near 1
    if exponent == 0.0:
        return 0.0
    if base <= 0.0:
        return 1.0
    return -math.expm1(exponent * math.log(base))


def heuristic_q_1d(n: int, D: float, p: float) -> float:
    """Predicted depolarized fraction for the 1D layout.

    Shallow (``D <= 5n/3``): ``1 - (1-2p)^(9 D^2 / 80)``;
    deep: ``1 - (1-2p)^(3nD/8 - 5n^2/16)``.
    """
    if n < 2 or D < 0:
        raise ValidationError(f"need n >= 2 and D >= 0, got n={n}, D={D}")
    _check_p(p)
    if D <= ONE_D_SATURATION * n:
        exponent = 9.0 / 80.0 * D * D
    else:
        exponent = 3.0 / 8.0 * n * D - 5.0 / 16.0 * n * n
    return _one_minus_power(1.0 - 2.0 * p, exponent)


def empirical_q_2d(n: int, D: float, p: float, require_square: bool = True) -> float:
    """Fitted depolarized fraction for the 2D layout (base ``1 - 3p/2``).

    The planner evaluates the fit at sizes such as n=1000 that have no square
    lattice; it passes ``require_square=False``.
    """
    side = math.isqrt(n)
    if require_square and side * side != n:
        raise ValidationError(f"2D formula needs a perfect-square n, got {n}")
    if D < 0:
        raise ValidationError(f"D must be nonnegative, got {D}")
    _check_p(p)
    if D <= TWO_D_SATURATION * math.sqrt(n):
        exponent = 0.026 * D**3 + 0.054 * D**2
    else:
        exponent = 0.5 * n * D - 0.74 * n**1.5 + 0.56 * n
    return _one_minus_power(1.0 - 1.5 * p, exponent)


def local_only_q(D: float, p: float) -> float:
    """Depolarized fraction with local noise and no gates: ``1 - (1-p)^D``."""
    _check_p(p)
    return _one_minus_power(1.0 - p, D)


def forward_q(arch: Arch | str, n: int, D: float, p: float) -> float:
    arch = Arch(arch)
    if arch is Arch.ONE_D:
        return heuristic_q_1d(n, D, p)
    if arch is Arch.TWO_D:
        return empirical_q_2d(n, D, p, require_square=False)
    raise ValidationError("no closed-form prediction exists for the nonlocal layout")


def cone_area(n: int, steps: float) -> float:
    """Space-time area swept by the mean error cone after ``steps`` Markov steps."""
    if n < 2 or steps < 0:
        raise ValidationError(f"need n >= 2 and steps >= 0, got n={n}, steps={steps}")
    if steps <= 5.0 / 6.0 * n:
        return 9.0 / 20.0 * steps * steps
    return 3.0 / 4.0 * n * steps - 5.0 / 16.0 * n * n


def ones_chain_matrix(n: int) -> np.ndarray:
    """Transition matrix of the ones chain on ``{0, ..., n}`` (rows sum to 1)."""
    if n < 4:
        raise ValidationError(f"ones chain needs n >= 4, got {n}")
    P = np.zeros((n + 1, n + 1))
    P[0, 0] = 1.0
    P[n, n] = 1.0
    P[1, 0], P[1, 2] = 0.2, 0.8
    P[n - 1, n], P[n - 1, n - 2] = 0.8, 0.2
    for x in range(2, n - 1):
        P[x, x + 2] = float(_UP)
        P[x, x - 2] = float(_DOWN)
        P[x, x] = float(_STAY)
    return P


def _ones_chain_rows(n: int) -> dict[int, dict[int, Fraction]]:
    rows: dict[int, dict[int, Fraction]] = {1: {0: Fraction(1, 5), 2: Fraction(4, 5)}}
    for x in range(2, n - 1):
        rows[x] = {x + 2: _UP, x - 2: _DOWN, x: _STAY}
    rows[n - 1] = {n: Fraction(4, 5), n - 2: Fraction(1, 5)}
    return rows


def _absorption_exact(n: int) -> Fraction:
    # Solve (I - Q) h = P[:, 0] over transient states 1..n-1 in exact
    # arithmetic. I - Q is banded (width 2) and diagonally dominant, so
    # elimination without pivoting is safe.
    rows = _ones_chain_rows(n)
    m = n - 1
    A = [[Fraction(0)] * m for _ in range(m)]
    b = [Fraction(0)] * m
    for x, targets in rows.items():
        i = x - 1
        A[i][i] += 1
        for y, prob in targets.items():
            if y == 0:
                b[i] += prob
            elif y < n:
                A[i][y - 1] -= prob
    for k in range(m):
        for i in range(k + 1, min(k + 3, m)):
            if A[i][k]:
                w = A[i][k] / A[k][k]
                for j in range(k, min(k + 3, m)):
                    A[i][j] -= w * A[k][j]
                b[i] -= w * b[k]
    h = [Fraction(0)] * m
    for i in range(m - 1, -1, -1):
        acc = b[i] - sum((A[i][j] * h[j] for j in range(i + 1, min(i + 3, m))), Fraction(0))
        h[i] = acc / A[i][i]
    return h[0]


def ones_chain_absorption(n: int, exact: bool = False) -> float | Fraction:
    """Probability that the ones chain started at 1 is absorbed at 0.

    The float path solves the full absorbing-chain system; ``exact=True``
    returns the rational value from an exact banded solve.
    """
    if n < 4:
        raise ValidationError(f"ones chain needs n >= 4, got {n}")
    if exact:
        return _absorption_exact(n)
    P = ones_chain_matrix(n)
    transient = np.arange(1, n)
    Q = P[np.ix_(transient, transient)]
    h = np.linalg.solve(np.eye(n - 1) - Q, P[transient, 0])
    return float(h[0])


def ones_chain_drift() -> Fraction:
    """Expected growth of an interior segment per step: 2 (16/25) - 2 (1/25)."""
    return 2 * _UP - 2 * _DOWN


@dataclass(frozen=True)
class RigorousBoundParams:
    c: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.c < 0.75:
            raise ValidationError(f"c must lie in (0, 3/4), got {self.c}")

    @property
    def log_term(self) -> float:
        return math.log(1.0 / (1.0 - math.sqrt(0.25 + self.c)))


def certified_area(steps: float, params: RigorousBoundParams) -> float:
    """Size of the error region that depolarizes a target with probability >= c."""
    area = 0.6 * steps * steps - 4.0 / 3.0 * math.sqrt(2.0 * params.log_term) * steps**1.5
    return max(0.0, area)


def rigorous_lower_bound_1d(n: int, D: float, p: float, params: RigorousBoundParams | None = None) -> float:
    """Provable lower bound on the 1D depolarized fraction for ``D < n``."""
    params = params or RigorousBoundParams()
    _check_p(p)
    if D < 0:
        raise ValidationError(f"D must be nonnegative, got {D}")
    if D >= n:
        raise ScopeError(f"the 1D lower bound requires D < n, got D={D}, n={n}")
    flip = 2.0 * p - p * p
    return params.c * _one_minus_power(1.0 - flip, certified_area(D / 2.0, params))


def scaling_regime(arch: Arch | str, n: int, D: float) -> Regime:
    arch = Arch(arch)
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    if arch is Arch.ONE_D:
        cutoff = ONE_D_SATURATION * n
    elif arch is Arch.TWO_D:
        cutoff = TWO_D_SATURATION * math.sqrt(n)
    else:
        cutoff = NONLOCAL_KAPPA * math.log2(n)
    return Regime.SHALLOW if D <= cutoff else Regime.DEEP
