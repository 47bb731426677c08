import math
import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from arqtc.analytic import NumericalInstabilityWarning, per_slot_outage
from arqtc.model import NetworkParams, q_hat
from arqtc.optimize import (InfeasibleAllocation, SparseApproximationWarning, allocate_budgets,
                            allocate_for_q_hats, budget_from_multiplier, equidistant_multiplier,
                            hop_objective, optimal_hop_count, sparse_tc_approximation)
from oracles import brute_force_allocation


def test_single_hop_gets_everything(ref):
    res = allocate_budgets([1.3], 7, ref)
    assert res.integer_budgets == (7,)
    assert res.continuous_budgets == (7.0,)


def test_reference_splits(ref):
    assert allocate_budgets([1, 1], 4, ref).integer_budgets == (2, 2)
    assert allocate_budgets([0.5, 1.5], 4, ref).integer_budgets == (1, 3)


def test_multiplier_matches_closed_form(ref):
    res = allocate_budgets([1, 1], 4, ref)
    assert res.multiplier == pytest.approx(equidistant_multiplier(2, 4, 1.0, ref), rel=1e-6)
    for n, D in ((3, 9), (4, 12), (5, 7)):
        res = allocate_budgets([0.8] * n, D, ref)
        assert res.multiplier == pytest.approx(equidistant_multiplier(n, D, 0.8, ref), rel=1e-6)


def test_closed_form_self_consistency(ref):
    gamma = equidistant_multiplier(2, 4, 2.0, ref)
    qh = q_hat(per_slot_outage(2.0, ref), ref.p)
    assert gamma < 0
    assert budget_from_multiplier(gamma, qh) == pytest.approx(2.0, abs=1e-9)
    gamma1 = equidistant_multiplier(1, 6, 1.0, ref)
    assert budget_from_multiplier(gamma1, q_hat(per_slot_outage(1.0, ref), ref.p)) == \
        pytest.approx(6.0, abs=1e-9)


def test_continuous_budget_sum(ref):
    for dist, D in (((0.5, 1.5), 4), ((0.3, 1, 2), 11), ((1, 1, 1, 1), 2)):
        res = allocate_budgets(dist, D, ref)
        assert math.fsum(res.continuous_budgets) == pytest.approx(D, abs=1e-9)
        assert sum(res.integer_budgets) == D
        assert all(x >= 0 for x in res.continuous_budgets)


def test_active_set_zeroes_easy_hops():
    # a nearly perfect hop should get nothing when the budget is small
    res = allocate_for_q_hats([0.01, 0.9], 1)
    assert res.continuous_budgets[0] == 0.0
    assert res.integer_budgets == (0, 1)


def test_equidistant_divisible(ref):
    for n in (2, 3, 4):
        res = allocate_budgets([0.7] * n, 3 * n, ref)
        assert res.integer_budgets == (3,) * n


def test_permutation_symmetry(ref):
    a = allocate_budgets([0.5, 1.0, 1.5], 9, ref)
    b = allocate_budgets([1.5, 0.5, 1.0], 9, ref)
    assert b.integer_budgets == (a.integer_budgets[2], a.integer_budgets[0], a.integer_budgets[1])


def test_infeasible():
    with pytest.raises(InfeasibleAllocation):
        allocate_for_q_hats([0.5], -1)
    with pytest.raises(InfeasibleAllocation):
        allocate_for_q_hats([], 3)
    with pytest.raises(InfeasibleAllocation):
        allocate_for_q_hats([1.0, 0.5], 3)


def test_zero_budget():
    assert allocate_for_q_hats([0.3, 0.6, 0.9], 0).integer_budgets == (0, 0, 0)


def _exchange_optimal(budgets, qhs):
    base = sum(hop_objective(b, qh) for b, qh in zip(budgets, qhs))
    for i in range(len(budgets)):
        for j in range(len(budgets)):
            if i == j or budgets[i] == 0:
                continue
            moved = list(budgets)
            moved[i] -= 1
            moved[j] += 1
            if sum(hop_objective(b, qh) for b, qh in zip(moved, qhs)) > base + 1e-12:
                return False
    return True


def test_exchange_optimal_random_instances():
    rng = random.Random(20240611)
    for _ in range(50):
        n = rng.randint(1, 4)
        D = rng.randint(0, 12)
        qhs = [rng.uniform(0.05, 0.98) for _ in range(n)]
        res = allocate_for_q_hats(qhs, D)
        assert sum(res.integer_budgets) == D
        assert _exchange_optimal(res.integer_budgets, qhs)
        _, best = brute_force_allocation(qhs, D)
        assert res.objective == pytest.approx(best, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(qhs=st.lists(st.floats(0.05, 0.98), min_size=2, max_size=4))
def test_clamped_total_monotone(qhs):
    from arqtc.optimize import _clamped_total
    L = [math.log(q) for q in qhs]
    gammas = [-50.0, -5.0, -1.0, -0.3, -0.1, -0.01, -0.001]
    totals = [_clamped_total(g, L) for g in gammas]
    assert all(a <= b for a, b in zip(totals, totals[1:]))
    assert totals[-1] > totals[0]


def test_hop_count_reference(ref):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalInstabilityWarning)
        best, rows = optimal_hop_count(1.0, 10, ref, N_max=8)
        assert best == 1
        assert len(rows) == 8
        assert [r.per_hop_budget for r in rows] == [10, 5, 3, 2, 2, 1, 1, 1]
        _, dense = optimal_hop_count(1.0, 10, ref.replace(lam=0.5), N_max=8)
    caps = [r.bound.capacity for r in dense]
    assert any(b > a for a, b in zip(caps, caps[1:]))


def test_hop_count_sparse(ref):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalInstabilityWarning)
        best, rows = optimal_hop_count(1.0, 10, ref.replace(lam=1e-4), N_max=8)
    assert best == 1
    assert rows[0].bound.capacity > rows[1].bound.capacity


@pytest.mark.xfail(strict=True, reason="the N=1 margin over N=2 is about 1.9x at lam=1e-4, "
                                        "not 10x; see the decision ledger")
def test_hop_count_sparse_margin(ref):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalInstabilityWarning)
        _, rows = optimal_hop_count(1.0, 10, ref.replace(lam=1e-4), N_max=8)
    assert rows[0].bound.capacity >= 10 * rows[1].bound.capacity


def test_hop_count_single_row(ref):
    best, rows = optimal_hop_count(1.0, 4, ref, c=1.0, N_max=1)
    assert best == 1 and len(rows) == 1
    with pytest.raises(ValueError):
        optimal_hop_count(1.0, 4, ref, N_max=0)


def test_remainder_rows(ref):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalInstabilityWarning)
        _, rows = optimal_hop_count(1.0, 10, ref, c=1.0, N_max=4)
    for r in rows:
        assert r.remainder_bound.capacity >= r.bound.capacity * (1 - 1e-12)


def test_sparse_approximation():
    params = NetworkParams(1e-3, 1.0, 3, 3)
    vals = [sparse_tc_approximation(n, 1.0, 10, params) for n in range(1, 6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    tiny = NetworkParams(1e-12, 1.0, 3, 3)
    for n in (1, 3):
        assert sparse_tc_approximation(n, 1.0, 10, tiny) == pytest.approx(1 / (10 + n))


def test_sparse_ranking_matches_bound():
    params = NetworkParams(1e-3, 1.0, 3, 3)
    _, rows = optimal_hop_count(1.0, 10, params, c=1.0, N_max=5)
    bound = [r.bound.capacity for r in rows]
    approx = [sparse_tc_approximation(n, 1.0, 10, params) for n in range(1, 6)]
    order = lambda xs: sorted(range(len(xs)), key=lambda i: -xs[i])
    assert order(bound) == order(approx)


def test_sparse_validity_warning(ref):
    with pytest.warns(SparseApproximationWarning):
        sparse_tc_approximation(2, 1.0, 10, ref)
