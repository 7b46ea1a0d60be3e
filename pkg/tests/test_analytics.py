import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from errprop.analytics import (
    Regime,
    RigorousBoundParams,
    certified_area,
    cone_area,
    empirical_q_2d,
    forward_q,
    heuristic_q_1d,
    local_only_q,
    ones_chain_absorption,
    ones_chain_drift,
    ones_chain_matrix,
    rigorous_lower_bound_1d,
    scaling_regime,
)
from errprop.errors import ScopeError, ValidationError

from oracles import simulate_ones_chain


def test_heuristic_1d_values():
    assert heuristic_q_1d(100, 0, 1e-3) == 0.0
    assert heuristic_q_1d(100, 100, 1e-3) == pytest.approx(0.8948, abs=1e-4)
    assert heuristic_q_1d(100, 200, 1e-3) == pytest.approx(1 - 0.998**4375, rel=1e-12)
    assert heuristic_q_1d(100, 200, 1e-3) == pytest.approx(0.99984, abs=1e-5)


def test_empirical_2d_values():
    assert empirical_q_2d(900, 0, 1e-3) == 0.0
    assert empirical_q_2d(900, 20, 1e-3) == pytest.approx(0.2915, abs=1e-4)
    assert empirical_q_2d(100, 40, 1e-3) == pytest.approx(1 - 0.9985 ** (2000 - 740 + 56), rel=1e-12)


def test_empirical_2d_requires_square():
    with pytest.raises(ValidationError):
        empirical_q_2d(1000, 10, 1e-3)
    assert 0 < empirical_q_2d(1000, 10, 1e-3, require_square=False) < 1


def test_forward_q_dispatch():
    assert forward_q("1d", 100, 50, 1e-3) == heuristic_q_1d(100, 50, 1e-3)
    assert forward_q("2d", 900, 50, 1e-3) == empirical_q_2d(900, 50, 1e-3)
    with pytest.raises(ValidationError):
        forward_q("nl", 100, 10, 1e-3)


def test_local_only():
    assert local_only_q(10, 0.1) == pytest.approx(1 - 0.9**10)


@pytest.mark.parametrize("n", [10, 60, 300, 900])
@pytest.mark.parametrize("p", [1e-6, 1e-4, 1e-3, 1e-2])
def test_1d_branch_continuity(n, p):
    D = 5 * n / 3
    shallow = 1 - (1 - 2 * p) ** (9 / 80 * D * D)
    deep = 1 - (1 - 2 * p) ** (3 / 8 * n * D - 5 / 16 * n * n)
    assert deep == pytest.approx(shallow, rel=1e-6)
    assert heuristic_q_1d(n, D * (1 + 1e-12), p) == pytest.approx(heuristic_q_1d(n, D, p), rel=1e-6)


def _2d_branch_gap(n, p):
    D = 3.226 * math.sqrt(n)
    shallow = empirical_q_2d(n, D, p)
    deep = 1 - (1 - 1.5 * p) ** (0.5 * n * D - 0.74 * n**1.5 + 0.56 * n)
    return abs(shallow - deep) / deep


@pytest.mark.parametrize("n", [100, 400, 900])
def test_2d_branch_gap_is_small(n):
    # the fitted constants are rounded, so the branches meet only to ~1e-4
    for p in (1e-6, 1e-4, 1e-3):
        assert _2d_branch_gap(n, p) <= 2e-4


@pytest.mark.xfail(strict=True, reason="rounded fit constants leave a ~1e-4 relative jump at the 2D boundary")
def test_2d_branch_continuity_tight():
    assert max(_2d_branch_gap(n, p) for n in (100, 400, 900) for p in (1e-6, 1e-4, 1e-3)) <= 1e-6


@pytest.mark.parametrize("fn,n", [(heuristic_q_1d, 100), (empirical_q_2d, 100), (empirical_q_2d, 900)])
def test_monotone_in_depth_and_p(fn, n):
    depths = np.arange(0, 400, 2)
    ps = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1]
    grid = np.array([[fn(n, D, p) for D in depths] for p in ps])
    assert np.all(np.diff(grid, axis=1) >= -1e-12)
    assert np.all(np.diff(grid, axis=0) >= -1e-12)
    assert np.all((grid >= 0) & (grid <= 1))


def test_cone_area():
    assert cone_area(100, 0) == 0
    assert cone_area(100, 10) == pytest.approx(45)
    # branch point 5n/6 = 10 for n = 12
    assert cone_area(12, 10) == pytest.approx(45)
    assert 3 / 4 * 12 * 10 - 5 / 16 * 144 == pytest.approx(45)


def test_ones_chain_matrix_is_stochastic():
    for n in (4, 5, 10, 31):
        P = ones_chain_matrix(n)
        assert np.allclose(P.sum(axis=1), 1.0)
        assert P[0, 0] == P[n, n] == 1.0


def test_ones_chain_absorption_bounds_and_growth():
    values = [ones_chain_absorption(n, exact=True) for n in range(4, 61)]
    assert all(isinstance(v, Fraction) for v in values)
    assert all(Fraction(1, 5) <= v <= Fraction(1, 4) for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert float(values[-1]) == pytest.approx(0.25, abs=1e-12)


def test_ones_chain_float_matches_exact():
    for n in range(4, 61):
        assert ones_chain_absorption(n) == pytest.approx(float(ones_chain_absorption(n, exact=True)), abs=1e-13)


def test_ones_chain_small_cases_by_hand():
    # n = 4: h1 = 1/5 + 4/5 h2 and h2 = 1/25 + 8/25 h2, since 2 -> 4 absorbs at the top
    h2 = Fraction(1, 25) / (1 - Fraction(8, 25))
    assert ones_chain_absorption(4, exact=True) == Fraction(1, 5) + Fraction(4, 5) * h2


def test_ones_chain_absorption_matches_simulation():
    hits = simulate_ones_chain(10, 200_000, seed=3)
    est = hits.mean()
    sigma = math.sqrt(est * (1 - est) / hits.size)
    assert abs(est - ones_chain_absorption(10)) <= 3 * sigma


def test_ones_chain_rejects_small_n():
    with pytest.raises(ValidationError):
        ones_chain_absorption(3)


def test_drift():
    assert ones_chain_drift() == Fraction(6, 5)
    # symmetric endpoints: each contributes half the drift
    assert ones_chain_drift() / 2 == Fraction(3, 5)


def test_rigorous_bound_clamps_at_small_depth():
    assert certified_area(1.0, RigorousBoundParams()) == 0.0
    assert rigorous_lower_bound_1d(200, 2, 0.01) == 0.0


def test_rigorous_bound_monotone_in_depth():
    values = [rigorous_lower_bound_1d(400, D, 0.01) for D in range(0, 400, 2)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] <= 0.5


def test_rigorous_bound_scope():
    with pytest.raises(ScopeError):
        rigorous_lower_bound_1d(100, 100, 0.01)


@pytest.mark.parametrize("c", [0.0, 0.75, 1.0])
def test_rigorous_params_range(c):
    with pytest.raises(ValidationError):
        RigorousBoundParams(c)


def test_rigorous_bound_below_heuristic():
    for n in (50, 100, 200, 400):
        for p in (1e-4, 1e-3, 1e-2, 0.05):
            for D in range(0, n, 4):
                assert rigorous_lower_bound_1d(n, D, p) <= heuristic_q_1d(n, D, p) + 0.05


@given(st.floats(0.01, 0.74), st.floats(0.0, 500.0))
def test_certified_area_nonnegative(c, t):
    assert certified_area(t, RigorousBoundParams(c)) >= 0.0


def test_scaling_regime():
    assert scaling_regime("1d", 100, 100) is Regime.SHALLOW
    assert scaling_regime("1d", 100, 200) is Regime.DEEP
    assert scaling_regime("2d", 900, 96) is Regime.SHALLOW
    assert scaling_regime("2d", 900, 97) is Regime.DEEP
    assert scaling_regime("nl", 1024, 20) is Regime.SHALLOW
    assert scaling_regime("nl", 1024, 22) is Regime.DEEP
