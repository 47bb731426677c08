"""Exact success probability, delay and capacity for one and two hops.

The joint probability of ``k`` failed slots followed by a success on a
link of length ``d`` is the alternating sum

    A_k = sum_l (-1)^l C(k, l) exp(-lam J(l + 1, d)),

and the two-hop analogue uses J2 with both hops' kernels.  Those sums
cancel heavily for large ``k``; terms are built in log space and added
with ``math.fsum`` so that the only remaining error is in the J values.
"""
from __future__ import annotations

import math
import warnings

from .model import HopPlan, NetworkParams, SuccessProfile, TcResult
from .quadrature import (DEFAULT_SPEC, QuadratureSpec, radial_integral_pair,
                         radial_integral_single)

# condition numbers above this mean more than 10 digits were lost
INSTABILITY_CONDITION = 1e10
TWO_HOP_BUDGET_CAP = 16


class NumericalInstabilityWarning(RuntimeWarning):
    pass


class ComplexityWarning(RuntimeWarning):
    pass


class PrecisionLossError(ArithmeticError):
    """Cancellation pushed a probability outside [0, 1]; no digits can be trusted."""


def _checked_probability(value: float, cond: float, what: str) -> float:
    if not -1e-9 <= value <= 1.0 + 1e-9:
        raise PrecisionLossError(f"{what}: result {value:.6g} is not a probability "
                                 f"(condition number {cond:.3g})")
    return min(max(value, 0.0), 1.0)


def log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binom_pmf(k: int, n: int, p: float) -> float:
    """P(Binomial(n, p) = k), evaluated in log space."""
    if k < 0 or k > n:
        return 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    return math.exp(log_binom(n, k) + k * math.log(p) + (n - k) * math.log1p(-p))


def signed_sum(terms) -> tuple[float, float]:
    """Correctly rounded sum and its condition number sum|t| / |sum t|."""
    total = math.fsum(terms)
    mass = math.fsum(abs(t) for t in terms)
    if mass == 0.0:
        return 0.0, 1.0
    return total, (mass / abs(total) if total != 0.0 else math.inf)


def _check_condition(cond: float, what: str):
    if cond > INSTABILITY_CONDITION:
        lost = "all" if math.isinf(cond) else f"{math.log10(cond):.1f}"
        warnings.warn(f"{what}: alternating sum lost {lost} digits",
                      NumericalInstabilityWarning, stacklevel=3)


def per_slot_outage(d: float, params: NetworkParams,
                    spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Single-slot outage probability q(d) = 1 - exp(-lam J(1, d))."""
    return -math.expm1(-params.lam * radial_integral_single(1, d, params, spec))


def _failure_runs(D: int, d: float, params: NetworkParams, spec: QuadratureSpec):
    lam = params.lam
    decay = [math.exp(-lam * radial_integral_single(ell + 1, d, params, spec))
             for ell in range(D + 1)]
    values, masses, worst = [], [], 1.0
    for k in range(D + 1):
        terms = [(-1.0) ** ell * math.exp(log_binom(k, ell)) * decay[ell]
                 for ell in range(k + 1)]
        value, cond = signed_sum(terms)
        values.append(min(max(value, 0.0), 1.0))
        masses.append(math.fsum(abs(t) for t in terms))
        worst = max(worst, cond)
    return values, masses, worst


def failure_run_probabilities(D: int, d: float, params: NetworkParams,
                              spec: QuadratureSpec = DEFAULT_SPEC):
    """A_k for k = 0..D: probability that k given slots fail and one more succeeds.

    Returns the list and the worst condition number of the individual sums.
    """
    values, _, worst = _failure_runs(D, d, params, spec)
    return values, worst


def _result_condition(weights, masses, result: float) -> float:
    """Rounding mass reaching a weighted sum of alternating sums, relative to the result.

    A_k close to zero can be computed with no correct digits and still
    contribute nothing; what matters is sum_k w_k * sum|terms_k| against
    the returned value.
    """
    mass = math.fsum(w * m for w, m in zip(weights, masses))
    if mass == 0.0:
        return 1.0
    return mass / result if result > 0 else math.inf


def success_by_slot_single(j: int, d: float, params: NetworkParams,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Probability that the packet is first decoded in slot ``j`` (j >= 1)."""
    if j < 1:
        raise ValueError("slot index starts at 1")
    runs, masses, _ = _failure_runs(j - 1, d, params, spec)
    p = params.p
    weights = [binom_pmf(k, j - 1, p) * p for k in range(j)]
    value = math.fsum(w * a for w, a in zip(weights, runs))
    cond = _result_condition(weights, masses, value)
    _check_condition(cond, f"slot {j}")
    return _checked_probability(value, cond, f"slot {j}")


def success_prob_single(D: int, d: float, params: NetworkParams,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> SuccessProfile:
    """Per-slot and cumulative success probability plus expected delay for budget ``D``."""
    if D < 0:
        raise ValueError("budget must be non-negative")
    runs, masses, _ = _failure_runs(D, d, params, spec)
    p = params.p
    per_slot = tuple(
        math.fsum(binom_pmf(k, j - 1, p) * p * runs[k] for k in range(j))
        for j in range(1, D + 2)
    )
    total = math.fsum(per_slot)
    # slot weights summed over j: a_k = sum_j pmf(k; j-1) p
    weights = [p * w for w in _slot_weights(D, p)]
    cond = _result_condition(weights, masses, total)
    _check_condition(cond, f"budget {D}")
    _checked_probability(total, cond, f"budget {D}")
    delay = math.fsum([j * ps for j, ps in enumerate(per_slot, start=1)]
                      + [(D + 1) * (1.0 - total)])
    return SuccessProfile(per_slot, total, delay, cond)


def expected_delay_single(D: int, d: float, params: NetworkParams,
                          spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return success_prob_single(D, d, params, spec).expected_delay


def transmission_capacity_single(D: int, d: float, params: NetworkParams,
                                 spec: QuadratureSpec = DEFAULT_SPEC) -> TcResult:
    prof = success_prob_single(D, d, params, spec)
    return TcResult.compose(params, prof.total, prof.expected_delay, "exact",
                            condition=prof.condition)


def _slot_weights(D: int, p: float) -> list[float]:
    # a_l = sum_{j=1}^{D+1} P(l transmissions among the first j-1 slots)
    return [math.fsum(binom_pmf(ell, j - 1, p) for j in range(ell + 1, D + 2))
            for ell in range(D + 1)]


def success_prob_two_hop_exact(D1: int, D2: int, d1: float, d2: float,
                               params: NetworkParams,
                               spec: QuadratureSpec = DEFAULT_SPEC,
                               budget_cap: int = TWO_HOP_BUDGET_CAP) -> float:
    """End-to-end success probability of a two-hop route.

    Both hops' interference is evaluated at one common receiver location;
    slot k on hop 2 ranges over 1..D2+1.
    """
    if D1 < 0 or D2 < 0:
        raise ValueError("budgets must be non-negative")
    if D1 + D2 > budget_cap:
        warnings.warn(f"two-hop exact sum with D1+D2={D1 + D2} needs "
                      f"{(D1 + 1) * (D2 + 1)} pair integrals and O(D^4) terms",
                      ComplexityWarning, stacklevel=2)
    lam, p = params.lam, params.p
    decay = [[math.exp(-lam * radial_integral_pair(r + 1, s + 1, d1, d2, params, spec))
              for s in range(D2 + 1)] for r in range(D1 + 1)]
    w1, w2 = _slot_weights(D1, p), _slot_weights(D2, p)
    terms, weights, masses = [], [], []
    for ell in range(D1 + 1):
        for m in range(D2 + 1):
            inner = [
                (-1.0) ** (r + s) * math.exp(log_binom(ell, r) + log_binom(m, s)) * decay[r][s]
                for r in range(ell + 1) for s in range(m + 1)
            ]
            joint = math.fsum(inner)
            weight = w1[ell] * w2[m] * p * p
            weights.append(weight)
            masses.append(math.fsum(abs(t) for t in inner))
            terms.append(weight * min(max(joint, 0.0), 1.0))
    total = math.fsum(terms)
    cond = _result_condition(weights, masses, total)
    _check_condition(cond, f"two-hop budgets ({D1}, {D2})")
    return _checked_probability(total, cond, f"two-hop budgets ({D1}, {D2})")


def expected_delay_multi(plan: HopPlan, params: NetworkParams,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Sum of per-hop expected delays."""
    return math.fsum(expected_delay_single(D, d, params, spec)
                     for d, D in zip(plan.distances, plan.budgets))


def transmission_capacity_two_hop_exact(D1: int, D2: int, d1: float, d2: float,
                                        params: NetworkParams,
                                        spec: QuadratureSpec = DEFAULT_SPEC) -> TcResult:
    ps = success_prob_two_hop_exact(D1, D2, d1, d2, params, spec)
    delay = expected_delay_multi(HopPlan([d1, d2], [D1, D2]), params, spec)
    return TcResult.compose(params, ps, delay, "exact")


def success_prob_exact(plan: HopPlan, params: NetworkParams,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Exact end-to-end success for routes of one or two hops."""
    if plan.n_hops == 1:
        return success_prob_single(plan.budgets[0], plan.distances[0], params, spec).total
    if plan.n_hops == 2:
        return success_prob_two_hop_exact(plan.budgets[0], plan.budgets[1],
                                          plan.distances[0], plan.distances[1], params, spec)
    raise ValueError("exact success probability is available for at most two hops")


def transmission_capacity_exact(plan: HopPlan, params: NetworkParams,
                                spec: QuadratureSpec = DEFAULT_SPEC) -> TcResult:
    ps = success_prob_exact(plan, params, spec)
    return TcResult.compose(params, ps, expected_delay_multi(plan, params, spec), "exact")
