import math

import pytest

from errprop.analytics import empirical_q_2d, forward_q, heuristic_q_1d
from errprop.errors import ConfigurationError, DiagnosticError, ValidationError
from errprop.planner import (
    PlanResult,
    max_useful_depth,
    required_error_rate,
    routed_depth,
)


def test_routed_depth_examples():
    assert routed_depth("1d", 1000, 10) == 30_000
    assert routed_depth("2d", 1000, 10) == 838
    assert routed_depth("1d", 2, 10) == 60


@pytest.mark.parametrize("arch", ["1d", "2d"])
@pytest.mark.parametrize("layers", [1, 3, 7, 10])
def test_routed_depth_even_and_positive(arch, layers):
    for n in (2, 4, 36, 100, 998, 1000):
        D = routed_depth(arch, n, layers)
        assert D > 0 and D % 2 == 0


def test_routed_depth_errors():
    with pytest.raises(ConfigurationError):
        routed_depth("nl", 100)
    with pytest.raises(ConfigurationError):
        routed_depth("1d", 101)
    with pytest.raises(ConfigurationError):
        routed_depth("2d", 100, 0)


def test_required_rate_1d_n1000():
    res = required_error_rate("1d", 1000)
    assert res.depth == 30_000
    assert res.required_p == pytest.approx(3.2e-8, rel=0.05)
    assert heuristic_q_1d(1000, res.depth, res.required_p) == pytest.approx(0.5, abs=1e-3)
    assert res.metadata["branch"] == "deep"


def test_required_rate_2d_n1000():
    res = required_error_rate("2d", 1000)
    assert res.depth == 838
    assert res.required_p == pytest.approx(1.17e-6, rel=0.05)
    assert empirical_q_2d(1000, res.depth, res.required_p, require_square=False) == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("arch", ["1d", "2d"])
@pytest.mark.parametrize("target", [0.01, 0.1, 0.5, 0.9, 0.999])
def test_bisection_self_consistency(arch, target):
    for n in (16, 100, 400, 1000):
        res = required_error_rate(arch, n, target)
        assert 0 < res.required_p < 1
        assert forward_q(arch, n, res.depth, res.required_p) == pytest.approx(target, abs=1e-3)
        assert res.achieved_q_frac == forward_q(arch, n, res.depth, res.required_p)


@pytest.mark.parametrize("arch", ["1d", "2d"])
def test_required_rate_decreases_with_n_and_depth(arch):
    ps = [required_error_rate(arch, n).required_p for n in (16, 64, 144, 400, 900, 1600)]
    assert all(b < a for a, b in zip(ps, ps[1:]))
    ds = [required_error_rate(arch, 400, depth=D).required_p for D in (20, 60, 200, 600, 2000)]
    assert all(b < a for a, b in zip(ds, ds[1:]))


@pytest.mark.parametrize("arch", ["1d", "2d"])
def test_p_times_nd_roughly_constant(arch):
    products = []
    for n in (400, 900, 1600):
        res = required_error_rate(arch, n)
        products.append(res.required_p * n * res.depth)
    assert max(products) / min(products) <= 1.5


def test_unbracketed_target_is_diagnostic():
    # even p = 1e-12 already exceeds this target
    with pytest.raises(DiagnosticError):
        required_error_rate("1d", 100, target_q_frac=1e-9)


@pytest.mark.parametrize("target", [0.0, 1.0, -0.2])
def test_target_out_of_range(target):
    with pytest.raises(ValidationError):
        required_error_rate("1d", 100, target_q_frac=target)


def test_unknown_method():
    with pytest.raises(ValidationError):
        required_error_rate("1d", 100, method="exact")


def test_mc_method_matches_heuristic_within_factor_3():
    for n in (10, 20):
        heur = required_error_rate("1d", n)
        mc = required_error_rate("1d", n, method="mc", samples=200, seed=1)
        assert mc.method == "mc_bisection"
        assert 1 / 3 <= mc.required_p / heur.required_p <= 3
        assert abs(mc.achieved_q_frac - 0.5) <= max(mc.metadata["stderr"], 1 / (200 * n))


def test_mc_method_is_deterministic():
    a = required_error_rate("2d", 16, method="mc", samples=100, seed=3)
    b = required_error_rate("2d", 16, method="mc", samples=100, seed=3, threads=2)
    assert a == b


def test_plan_result_serializes():
    d = required_error_rate("1d", 100).to_dict()
    assert set(d) == {"n", "arch", "depth", "target_q_frac", "required_p", "method", "achieved_q_frac", "metadata"}
    assert isinstance(PlanResult(**d), PlanResult)


def test_max_useful_depth_closed_form():
    # shallow 1D branch: (9/80) D^2 |ln(1-2p)| = |ln(1 - 0.5192)|
    p = 1e-3
    threshold = 2 * math.sqrt(1 - 0.9326)
    D_star = math.sqrt(math.log(1 - threshold) / (9 / 80 * math.log(1 - 2 * p)))
    D = max_useful_depth("1d", 900, p)
    assert D_star == pytest.approx(57, abs=0.5)
    assert D % 2 == 0 and D - 2 < D_star <= D


@pytest.mark.parametrize("arch,n", [("1d", 900), ("2d", 900), ("1d", 100)])
def test_max_useful_depth_is_smallest(arch, n):
    for p in (1e-4, 1e-3, 1e-2):
        D = max_useful_depth(arch, n, p)
        threshold = 2 * math.sqrt(1 - 0.9326)
        assert forward_q(arch, n, D, p) > threshold
        assert D == 2 or forward_q(arch, n, D - 2, p) <= threshold


def test_max_useful_depth_other_class():
    assert max_useful_depth("1d", 900, 1e-3, "bipartite_deg3") < max_useful_depth("1d", 900, 1e-3, "deg3")


def test_max_useful_depth_never_crossed():
    with pytest.raises(DiagnosticError):
        max_useful_depth("1d", 900, 1e-15)
