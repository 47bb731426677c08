"""FKG bounds on the success probability and the capacity lower bounds built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

from .analytic import (_check_condition, failure_run_probabilities, log_binom,
                       per_slot_outage, signed_sum)
from .model import HopPlan, NetworkParams, TcResult, q_hat
from .quadrature import DEFAULT_SPEC, QuadratureSpec, radial_integral_single

Tightness = Union[float, Sequence[float]]


class NumericRangeError(ArithmeticError):
    """The parameters put an intermediate probability below floating-point range."""


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float
    conditional: float
    tightness_c: float
    q: float
    q_hat: float


def success_upper_bound_single(D: int, d: float, params: NetworkParams,
                               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """1 - (p q + 1 - p)^(D+1)."""
    q = per_slot_outage(d, params, spec)
    return 1.0 - q_hat(q, params.p) ** (D + 1)


def conditional_success_given_failures(D: int, d: float, params: NetworkParams,
                                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """P(SIR_{D+1} >= beta | SIR_1 < beta, ..., SIR_D < beta)."""
    if D < 0:
        raise ValueError("budget must be non-negative")
    runs, cond_num = failure_run_probabilities(D, d, params, spec)
    lam = params.lam
    terms = [(-1.0) ** ell * math.exp(log_binom(D, ell)
                                      - lam * radial_integral_single(ell, d, params, spec))
             for ell in range(D + 1)]
    denom, cond_den = signed_sum(terms)
    _check_condition(max(cond_num, cond_den), f"conditional success at D={D}")
    if not denom > 1e-300:
        raise NumericRangeError(
            f"P({D} consecutive failures) = {denom:.3g} is outside the representable range")
    return min(max(runs[D] / denom, 0.0), 1.0)


def tightness_constant(D: int, d: float, params: NetworkParams,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """c = conditional / (1 - q), clamped to (0, 1]."""
    q = per_slot_outage(d, params, spec)
    c = conditional_success_given_failures(D, d, params, spec) / (1.0 - q)
    return min(max(c, math.ulp(0.0)), 1.0)


def success_lower_bound_single(D: int, d: float, params: NetworkParams,
                               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    q = per_slot_outage(d, params, spec)
    cond = conditional_success_given_failures(D, d, params, spec)
    return cond * (1.0 - q_hat(q, params.p) ** (D + 1)) / (1.0 - q)


def single_hop_bounds(D: int, d: float, params: NetworkParams,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> BoundPair:
    q = per_slot_outage(d, params, spec)
    cond = conditional_success_given_failures(D, d, params, spec)
    qh = q_hat(q, params.p)
    geometric = 1.0 - qh ** (D + 1)
    c = min(max(cond / (1.0 - q), math.ulp(0.0)), 1.0)
    return BoundPair(cond * geometric / (1.0 - q), geometric, cond, c, q, qh)


def hop_tightness(plan: HopPlan, params: NetworkParams,
                  spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, ...]:
    """Tightness constant of every hop, each at its own distance and budget."""
    return tuple(tightness_constant(D, d, params, spec)
                 for d, D in zip(plan.distances, plan.budgets))


def _per_hop(c: Tightness, n: int) -> list[float]:
    if isinstance(c, (int, float)):
        values = [float(c)] * n
    else:
        values = [float(x) for x in c]
        if len(values) != n:
            raise ValueError(f"expected {n} tightness constants, got {len(values)}")
    if any(not 0 < x <= 1 for x in values):
        raise ValueError(f"tightness constants must lie in (0, 1], got {values}")
    return values


def _hop_geometric(plan: HopPlan, params: NetworkParams, spec: QuadratureSpec):
    out = []
    for d, D in zip(plan.distances, plan.budgets):
        q = per_slot_outage(d, params, spec)
        qh = q_hat(q, params.p)
        out.append((q, qh, 1.0 - qh ** (D + 1)))
    return out


def success_lower_bound_multi(plan: HopPlan, params: NetworkParams, c: Tightness = 1.0,
                              spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Product of per-hop terms c_n (1 - qhat_n^(D_n+1)); c_n = c gives c^N."""
    cs = _per_hop(c, plan.n_hops)
    return math.prod(cn * g for cn, (_, _, g) in zip(cs, _hop_geometric(plan, params, spec)))


class DelayBound(NamedTuple):
    estimate: float
    ceiling: int


def expected_delay_bound_multi(plan: HopPlan, params: NetworkParams, c: Tightness = 1.0,
                               spec: QuadratureSpec = DEFAULT_SPEC) -> DelayBound:
    """Per-hop delay model summed over hops, and the hard ceiling D + N.

    Each hop contributes c (1 - qhat^(D+1)) / (1 - qhat) + (D + 1)(1 - c),
    the mean of min(first success, D + 1) when a fraction c of the
    independent-slot success law is kept and the rest runs out the budget.
    """
    cs = _per_hop(c, plan.n_hops)
    parts = []
    for cn, D, (_, qh, g) in zip(cs, plan.budgets, _hop_geometric(plan, params, spec)):
        parts.append(cn * g / (1.0 - qh) + (D + 1) * (1.0 - cn))
    ceiling = plan.total_budget + plan.n_hops
    return DelayBound(min(math.fsum(parts), float(ceiling)), ceiling)


def tc_lower_bound(plan: HopPlan, params: NetworkParams, c: Tightness = 1.0,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> TcResult:
    success = success_lower_bound_multi(plan, params, c, spec)
    delay = expected_delay_bound_multi(plan, params, c, spec).estimate
    return TcResult.compose(params, success, delay, "lower-bound", kind="per-hop-delay")


def tc_lower_bound_simple(plan: HopPlan, params: NetworkParams, c: Tightness = 1.0,
                          spec: QuadratureSpec = DEFAULT_SPEC,
                          total_budget: Optional[int] = None) -> TcResult:
    """lam R prod_n c_n (1 - qhat_n^(D_n+1)) / (D + N), the budget optimizer's objective.

    ``total_budget`` overrides D when the plan leaves some of it unassigned,
    as the floor(D/N) split of the hop-count search does.
    """
    success = success_lower_bound_multi(plan, params, c, spec)
    D = plan.total_budget if total_budget is None else total_budget
    if D < plan.total_budget:
        raise ValueError(f"total budget {D} is below the plan's {plan.total_budget}")
    delay = D + plan.n_hops
    return TcResult.compose(params, success, float(delay), "lower-bound", kind="delay-ceiling")
