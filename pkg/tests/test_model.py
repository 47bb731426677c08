import math

import pytest
from hypothesis import given, strategies as st

from arqtc.model import (HopPlan, InvalidAccessProbability, InvalidDensity, InvalidHopPlan,
                         InvalidPathLoss, InvalidThreshold, NetworkParams, SuccessProfile,
                         TcResult, outage_constant, q_hat)


def test_rate_is_log2():
    assert NetworkParams(0.1, 0.5, 3, 3).rate == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("kwargs, exc", [
    (dict(lam=0, p=0.5, alpha=3, beta=3), InvalidDensity),
    (dict(lam=-1, p=0.5, alpha=3, beta=3), InvalidDensity),
    (dict(lam=0.1, p=0, alpha=3, beta=3), InvalidAccessProbability),
    (dict(lam=0.1, p=1.01, alpha=3, beta=3), InvalidAccessProbability),
    (dict(lam=0.1, p=0.5, alpha=2, beta=3), InvalidPathLoss),
    (dict(lam=0.1, p=0.5, alpha=1.5, beta=3), InvalidPathLoss),
    (dict(lam=0.1, p=0.5, alpha=3, beta=0), InvalidThreshold),
    (dict(lam=float("nan"), p=0.5, alpha=3, beta=3), InvalidDensity),
])
def test_construction_rejects(kwargs, exc):
    with pytest.raises(exc):
        NetworkParams(**kwargs)


def test_p_one_allowed():
    assert NetworkParams(0.1, 1.0, 3, 3).p == 1.0


def test_outage_constant_values():
    assert outage_constant(NetworkParams(1, 1, 4, 1)) == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    direct = 2 * math.pi ** 2 / (3 * math.sin(2 * math.pi / 3))
    assert outage_constant(NetworkParams(1, 1, 3, 1)) == pytest.approx(direct, rel=1e-14)
    assert outage_constant(NetworkParams(1, 1, 3, 1)) == pytest.approx(7.59763, abs=1e-5)


def test_outage_constant_blows_up_near_two():
    vals = [outage_constant(NetworkParams(1, 1, a, 1)) for a in (2.1, 2.01, 2.001)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 1e3


def test_outage_constant_decreasing_in_alpha():
    vals = [outage_constant(NetworkParams(1, 1, a, 1)) for a in (2.1, 2.5, 3, 4, 6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_params_are_immutable():
    params = NetworkParams(0.1, 0.5, 3, 3)
    with pytest.raises(AttributeError):
        params.lam = 1.0
    assert params.replace(lam=0.2).lam == 0.2


def test_hop_plan_validation():
    with pytest.raises(InvalidHopPlan):
        HopPlan([1.0], [1, 2])
    with pytest.raises(InvalidHopPlan):
        HopPlan([], [])
    with pytest.raises(InvalidHopPlan):
        HopPlan([0.0], [1])
    with pytest.raises(InvalidHopPlan):
        HopPlan([1.0], [-1])


def test_equidistant_plan():
    plan = HopPlan.equidistant(2.0, 4, 3)
    assert plan.distances == (0.5,) * 4
    assert plan.total_distance == pytest.approx(2.0)
    assert plan.total_budget == 12
    assert plan.n_hops == 4


def test_tc_identity():
    params = NetworkParams(0.1, 0.5, 3, 3)
    res = TcResult.compose(params, 0.6, 2.5, "exact")
    assert res.capacity * res.delay == pytest.approx(res.density_rate * res.success, rel=1e-12)
    with pytest.raises(ValueError):
        TcResult.compose(params, 0.6, 2.5, "guess")


def test_success_profile_invariants():
    prof = SuccessProfile((0.2, 0.1), 0.3, 1.5)
    assert not prof.unstable


@given(st.floats(0, 1), st.floats(0.01, 1))
def test_q_hat_in_unit_interval(q, p):
    assert 0 <= q_hat(q, p) <= 1
    assert q_hat(q, 1.0) == pytest.approx(q)
