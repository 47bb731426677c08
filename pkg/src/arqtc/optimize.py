"""Retransmission-budget allocation across hops and hop-count selection.

Both problems maximize the delay-ceiling capacity bound

    lam R prod_n c_n (1 - qhat_n^(D_n + 1)) / (D + N).

For a fixed route the denominator is constant, so budgets maximize the
separable concave sum  sum_n ln(1 - qhat_n^(D_n + 1)).  The stationarity
condition gives

    D_n + 1 = ln(gamma / (ln qhat_n + gamma)) / ln qhat_n,   gamma < 0,

and gamma is found by bisection (waterfilling), with hops whose optimum
would be negative clamped to zero.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from .bounds import Tightness, hop_tightness, tc_lower_bound_simple
from .analytic import per_slot_outage
from .model import HopPlan, NetworkParams, TcResult, outage_constant, q_hat
from .quadrature import DEFAULT_SPEC, QuadratureSpec


class InfeasibleAllocation(ValueError):
    pass


class SparseApproximationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AllocationResult:
    continuous_budgets: tuple[float, ...]
    integer_budgets: tuple[int, ...]
    multiplier: float
    objective: float
    q_hats: tuple[float, ...]


def _stationary_budget(gamma: float, log_qh: float) -> float:
    """Unconstrained D_n(gamma); log_qh < 0 and gamma < 0."""
    # ln(gamma / (L + gamma)) = -ln(1 + L/gamma), written to avoid cancellation
    return -math.log1p(log_qh / gamma) / log_qh - 1.0


def _clamped_total(gamma: float, log_qhs: Sequence[float]) -> float:
    return math.fsum(max(0.0, _stationary_budget(gamma, L)) for L in log_qhs)


def hop_objective(budget: float, qh: float) -> float:
    """ln(1 - qhat^(budget + 1))."""
    return math.log(-math.expm1((budget + 1) * math.log(qh)))


def _greedy_integer(floors: list[int], qhs: Sequence[float], D: int) -> list[int]:
    budgets = list(floors)
    while sum(budgets) < D:
        gains = [hop_objective(b + 1, qh) - hop_objective(b, qh)
                 for b, qh in zip(budgets, qhs)]
        best = max(range(len(gains)), key=lambda i: (gains[i], -i))
        budgets[best] += 1
    # one unit moved between any two hops must not help
    improved = True
    while improved:
        improved = False
        for i in range(len(budgets)):
            if budgets[i] == 0:
                continue
            for j in range(len(budgets)):
                if i == j:
                    continue
                delta = (hop_objective(budgets[i] - 1, qhs[i]) - hop_objective(budgets[i], qhs[i])
                         + hop_objective(budgets[j] + 1, qhs[j]) - hop_objective(budgets[j], qhs[j]))
                if delta > 1e-15:
                    budgets[i] -= 1
                    budgets[j] += 1
                    improved = True
    return budgets


def allocate_for_q_hats(qhs: Sequence[float], D: int, tol: float = 1e-12) -> AllocationResult:
    """Waterfilling allocation of ``D`` retransmissions over hops with the given qhat values."""
    if D < 0:
        raise InfeasibleAllocation(f"total budget must be non-negative, got {D}")
    if not qhs:
        raise InfeasibleAllocation("no hops to allocate over")
    if any(not 0.0 < qh < 1.0 for qh in qhs):
        raise InfeasibleAllocation(f"qhat values must lie in (0, 1), got {list(qhs)}")
    n = len(qhs)
    log_qhs = [math.log(qh) for qh in qhs]

    if n == 1:
        gamma = equidistant_multiplier_from_q_hat(qhs[0], 1, D)
        cont = [float(D)]
    else:
        hi = 0.0
        lo = -max(-L for L in log_qhs) * (D + n)
        while _clamped_total(lo, log_qhs) > D:
            lo *= 2.0
        mid = lo
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            total = _clamped_total(mid, log_qhs)
            if abs(total - D) <= tol:
                break
            if total < D:
                lo = mid
            else:
                hi = mid
        gamma = mid
        cont = [max(0.0, _stationary_budget(gamma, L)) for L in log_qhs]
        # spread the bisection residual over the active hops
        active = [i for i, x in enumerate(cont) if x > 0]
        residual = (D - math.fsum(cont)) / max(len(active), 1)
        cont = [x + residual if i in active else x for i, x in enumerate(cont)]

    floors = []
    for x in cont:
        nearest = round(x)
        floors.append(int(nearest) if abs(x - nearest) < 1e-9 else int(math.floor(x)))
    if sum(floors) > D:
        floors = [int(math.floor(x)) for x in cont]
    integer = _greedy_integer(floors, qhs, D)
    objective = math.fsum(hop_objective(b, qh) for b, qh in zip(integer, qhs))
    return AllocationResult(tuple(cont), tuple(integer), gamma, objective, tuple(qhs))


def allocate_budgets(distances: Sequence[float], D: int, params: NetworkParams,
                     c: Tightness = 1.0,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> AllocationResult:
    """Split ``D`` retransmissions across hops of the given lengths.

    ``c`` scales the objective by a constant and does not change the split;
    it is accepted so callers can pass the same arguments as to the bounds.
    """
    if any(not d > 0 for d in distances):
        raise InfeasibleAllocation(f"hop distances must be positive, got {list(distances)}")
    qhs = [q_hat(per_slot_outage(d, params, spec), params.p) for d in distances]
    return allocate_for_q_hats(qhs, D)


def equidistant_multiplier_from_q_hat(qh: float, N: int, D: int) -> float:
    L = math.log(qh)
    e = math.exp(L * (D + N) / N)
    return L * e / (1.0 - e)


def equidistant_multiplier(N: int, D: int, d: float, params: NetworkParams,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Closed-form multiplier for ``N`` hops of length ``d`` sharing ``D`` retransmissions."""
    qh = q_hat(per_slot_outage(d, params, spec), params.p)
    return equidistant_multiplier_from_q_hat(qh, N, D)


def budget_from_multiplier(gamma: float, qh: float) -> float:
    return _stationary_budget(gamma, math.log(qh))


@dataclass(frozen=True)
class HopCountRow:
    n_hops: int
    per_hop_budget: int
    bound: TcResult
    remainder_bound: TcResult


def optimal_hop_count(d: float, D: int, params: NetworkParams, c: Optional[Tightness] = None,
                      N_max: int = 8, spec: QuadratureSpec = DEFAULT_SPEC):
    """Best number of equidistant hops under the delay-ceiling bound.

    Each hop gets floor(D/N) retransmissions.  ``c=None`` uses each hop's own
    tightness constant.  Rows also carry the bound when the D mod N leftover
    slots are handed out greedily.  Ties go to the smaller N.
    """
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    rows = []
    for N in range(1, N_max + 1):
        plan = HopPlan.equidistant(d, N, D // N)
        cn = hop_tightness(plan, params, spec) if c is None else c
        bound = tc_lower_bound_simple(plan, params, cn, spec, total_budget=D)
        alloc = allocate_budgets(plan.distances, D, params, spec=spec)
        full = HopPlan(plan.distances, alloc.integer_budgets)
        cf = hop_tightness(full, params, spec) if c is None else c
        rows.append(HopCountRow(N, D // N, bound, tc_lower_bound_simple(full, params, cf, spec)))
    best = max(rows, key=lambda r: (r.bound.capacity, -r.n_hops))
    return best.n_hops, rows


SPARSE_VALIDITY = 0.1


def sparse_tc_approximation(N: int, d: float, D: int, params: NetworkParams) -> float:
    """Small-density expansion of the N-hop bound objective with p close to 1.

    Keeps the first-order term of 1 - (1 - x/N^2)^(floor(D/N)+1) per hop with
    x = c1 lam d^2 beta^(2/alpha):

        [1 - N (x / N^2)^(floor(D/N) + 1)] / (D + N)
    """
    x = outage_constant(params) * params.lam * d * d * params.beta ** (2.0 / params.alpha)
    if x >= SPARSE_VALIDITY:
        warnings.warn(f"sparse expansion used at c1*lam*d^2*beta^(2/alpha) = {x:.3g} "
                      f">= {SPARSE_VALIDITY}", SparseApproximationWarning, stacklevel=2)
    m = D // N + 1
    return (1.0 - N * (x / (N * N)) ** m) / (D + N)
