"""Radial integrals of the interference kernel.

Every probability in the analytic module reduces to

    J(l, d)           = 2 pi int_0^inf r (1 - K_d(r)^l) dr
    J2(r, s; d1, d2)  = 2 pi int_0^inf x (1 - K_d1(x)^r K_d2(x)^s) dx

with the per-interferer factor K_d(r) = 1 - p + p r^a / (r^a + beta d^a).
The integrals are evaluated in u = r^2 (which removes the Jacobian), with
an interior piece up to the half-power radius.  Past that radius the
integrand behaves like p beta (r d1^a + s d2^a) u^(-a/2), so the tail is
mapped onto a finite interval by v = u^(-(a-2)/2), where it becomes a
bounded smooth function.  No truncation radius is needed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

from .model import NetworkParams, outage_constant

class ToleranceError(ArithmeticError):
    """Raised when a quadrature cannot meet its tolerance within the subdivision cap."""


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_SPEC = QuadratureSpec()


def kernel_value(r: float, d: float, params: NetworkParams) -> float:
    """Laplace factor of one interferer at distance ``r`` from a receiver whose link length is ``d``."""
    if r == 0:
        return 1.0 - params.p
    if math.isinf(r):
        return 1.0
    ra = r ** params.alpha
    return 1.0 - params.p + params.p * ra / (ra + params.beta * d ** params.alpha)


def _expit(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@lru_cache(maxsize=65536)
def _pair_integral(r_exp: int, s_exp: int, d1: float, d2: float,
                   p: float, alpha: float, beta: float, spec: QuadratureSpec) -> float:
    if r_exp == 0 and s_exp == 0:
        return 0.0
    half_a = 0.5 * alpha
    c1 = beta * d1 ** alpha
    c2 = beta * d2 ** alpha

    log_c1 = math.log(c1)
    log_c2 = math.log(c2)

    def one_minus_k(log_u):
        # 1 - K^r K^s as a function of ln u, safe for very large u
        x = half_a * log_u
        log_k = 0.0
        if r_exp:
            log_k += r_exp * math.log1p(-p * _expit(log_c1 - x))
        if s_exp:
            log_k += s_exp * math.log1p(-p * _expit(log_c2 - x))
        return -math.expm1(log_k)

    def integrand(u):
        return one_minus_k(math.log(u)) if u > 0 else -math.expm1(
            r_exp * math.log1p(-p) + s_exp * math.log1p(-p))

    weight = p * beta * (r_exp * d1 ** alpha + s_exp * d2 ** alpha)
    reach = [d for d, e in ((d1, r_exp), (d2, s_exp)) if e]
    u_split = (max(reach) * beta ** (1.0 / alpha)) ** 2

    # tail: v = u^(-(a-2)/2) maps [u_split, inf) onto (0, v0]; since the
    # integrand decays like weight * u^(-a/2), the mapped integrand tends to
    # the constant 2 weight / (a - 2) at v = 0 and the tail needs no cutoff
    expo = 0.5 * (alpha - 2.0)
    jac = 1.0 / expo
    v0 = u_split ** -expo

    def integrand_v(v):
        if v <= 0.0:
            return weight * jac
        log_v = math.log(v)
        log_u = -log_v / expo
        f = one_minus_k(log_u)
        return jac * math.exp(math.log(f) + log_u - log_v) if f > 0 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            inner, _ = integrate.quad(integrand, 0.0, u_split, epsabs=spec.abs_tol,
                                      epsrel=spec.rel_tol, limit=spec.max_subdivisions)
            tail, _ = integrate.quad(integrand_v, 0.0, v0, epsabs=spec.abs_tol,
                                     epsrel=spec.rel_tol, limit=spec.max_subdivisions)
        except integrate.IntegrationWarning as exc:
            raise ToleranceError(str(exc)) from exc
    return math.pi * (inner + tail)


def radial_integral_single(ell: int, d: float, params: NetworkParams,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Area integral of 1 - K_d^ell over the plane."""
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if ell == 0:
        return 0.0
    return _pair_integral(int(ell), 0, float(d), float(d),
                          params.p, params.alpha, params.beta, spec)


def radial_integral_pair(r_exp: int, s_exp: int, d1: float, d2: float,
                         params: NetworkParams,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Area integral of 1 - K_d1^r K_d2^s with both receivers at the same point."""
    if r_exp < 0 or s_exp < 0:
        raise ValueError("exponents must be non-negative")
    r_exp, s_exp, d1, d2 = int(r_exp), int(s_exp), float(d1), float(d2)
    # canonical order so that swapped calls share one cache entry
    if (s_exp, d2) < (r_exp, d1):
        r_exp, s_exp, d1, d2 = s_exp, r_exp, d2, d1
    if r_exp == 0:
        return radial_integral_single(s_exp, d2, params, spec)
    if s_exp == 0:
        return radial_integral_single(r_exp, d1, params, spec)
    if d1 == d2:
        return radial_integral_single(r_exp + s_exp, d1, params, spec)
    return _pair_integral(r_exp, s_exp, d1, d2, params.p, params.alpha, params.beta, spec)


def closed_form_single(d: float, params: NetworkParams) -> float:
    """Closed form of J(1, d) = p d^2 beta^(2/alpha) * 2 pi^2 csc(2 pi/alpha) / alpha."""
    return params.p * d * d * params.beta ** (2.0 / params.alpha) * outage_constant(params)
