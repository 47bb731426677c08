"""Monte Carlo validation of the ARQ model on a finite Poisson field.

A trial drops interferers once in a disc around the route midpoint and keeps
them in place for every slot and hop of the packet.  Activity marks and
Rayleigh fading are fresh in each slot.  Relays sit on the source to
destination segment, so each hop sees interference at its own receiver.

Interferers outside the disc are not dropped.  Their effect on one slot is
folded in as a deterministic offset: with unit-mean exponential fading on
the desired link,

    P(h >= beta d^a (I_near + I_far)) = P(h >= beta d^a I_near) * E exp(-beta d^a I_far),

and the last factor is exp(-lam * J_far) with J_far the kernel integral
over the missing region.  Single-slot statistics are therefore exact for
any disc size; only cross-slot correlation from far interferers is lost.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from ..model import HopPlan, NetworkParams, TcResult, outage_constant
from ..quadrature import closed_form_single
from . import _kernel_py

try:
    if os.environ.get("ARQTC_PURE_PYTHON"):
        raise ImportError("pure Python backend requested")
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _kernel_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled
DEFAULT_BACKEND = "cython" if _compiled is not None else "python"

DELAY_CONVENTIONS = ("analytic-compatible", "stop-on-failure")
GEOMETRIES = ("segment", "colocated")


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    ``region_radius`` of None picks the smallest disc whose far field holds
    at most ``far_fraction`` of the single-slot outage exponent of the
    longest hop.  ``geometry="colocated"`` measures every hop's interference
    at the route midpoint, matching the two-hop analytic formula.
    ``resample_locations`` redraws the field in every slot (diagnostic).
    """

    trials: int = 10_000
    seed: int = 0
    region_radius: Optional[float] = None
    delay_convention: str = "analytic-compatible"
    confidence: float = 0.95
    geometry: str = "segment"
    resample_locations: bool = False
    far_field: bool = True
    far_fraction: float = 0.05
    workers: int = 1
    block_size: int = 2048
    backend: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.region_radius is not None and not self.region_radius > 0:
            raise ValueError("region_radius must be positive")
        if self.delay_convention not in DELAY_CONVENTIONS:
            raise ValueError(f"delay_convention must be one of {DELAY_CONVENTIONS}")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")
        if not 0 < self.far_fraction < 1:
            raise ValueError("far_fraction must lie in (0, 1)")
        if self.workers < 1 or self.block_size < 1:
            raise ValueError("workers and block_size must be >= 1")
        if self.backend is not None and self.backend not in BACKENDS:
            raise ValueError(f"backend {self.backend!r} unavailable; have {sorted(BACKENDS)}")

    def kernel(self):
        return BACKENDS[self.backend or DEFAULT_BACKEND]


@dataclass(frozen=True)
class PacketOutcome:
    success: bool
    per_hop_slots: tuple[int, ...]
    total_slots: int


@dataclass(frozen=True)
class Interval:
    value: float
    lo: float
    hi: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class SimEstimate:
    p_success: Interval
    mean_delay: Interval
    capacity: Interval
    trials: int
    seed: int
    delay_convention: str
    successes: int
    delay_sum: int


@dataclass(frozen=True)
class Layout:
    mean_count: float
    disk_radius: float
    center_x: float
    rx_x: np.ndarray
    gain: np.ndarray
    offset: np.ndarray


def auto_region_radius(d_max: float, params: NetworkParams, far_fraction: float) -> float:
    """Radius beyond which the kernel tail holds ``far_fraction`` of J(1, d_max).

    Uses the tail bound 2 pi p beta d^a R^(2-a) / (a-2) against the closed form
    p c1 d^2 beta^(2/a).
    """
    a, b = params.alpha, params.beta
    ratio = (2.0 * math.pi * b * d_max ** a
             / ((a - 2.0) * far_fraction * outage_constant(params) * d_max ** 2 * b ** (2.0 / a)))
    return ratio ** (1.0 / (a - 2.0))


def far_field_integral(d: float, offset: float, disk_radius: float,
                       params: NetworkParams) -> float:
    """Kernel integral over the plane outside a disc, seen from a receiver ``offset`` off-centre."""
    p, a, b = params.p, params.alpha, params.beta
    bd = b * d ** a

    def one_minus_k(r):
        return p * bd / (r ** a + bd)

    inner_edge = disk_radius - offset
    outer_edge = disk_radius + offset
    half_power = d * b ** (1.0 / a)
    pts = [half_power] if half_power < inner_edge else None
    inside, _ = integrate.quad(lambda r: 2.0 * math.pi * r * one_minus_k(r), 0.0, inner_edge,
                               points=pts, epsabs=1e-13, epsrel=1e-11, limit=200)
    if offset > 0:
        def partial(r):
            kappa = (r * r + offset * offset - disk_radius ** 2) / (2.0 * r * offset)
            return 2.0 * r * one_minus_k(r) * math.acos(min(1.0, max(-1.0, kappa)))

        lens, _ = integrate.quad(partial, inner_edge, outer_edge, epsabs=1e-13, epsrel=1e-11,
                                 limit=200)
        inside += lens
    return max(closed_form_single(d, params) - inside, 0.0)


def route_layout(distances: Sequence[float], params: NetworkParams, config: SimConfig) -> Layout:
    distances = [float(x) for x in distances]
    total = math.fsum(distances)
    center = 0.5 * total
    region = config.region_radius
    if region is None:
        region = auto_region_radius(max(distances), params, config.far_fraction)
    disk = region + center
    if config.geometry == "segment":
        rx = np.cumsum(distances)
    else:
        rx = np.full(len(distances), center)
    gain = np.array([params.beta * x ** params.alpha for x in distances])
    if config.far_field:
        offset = np.array([params.lam * far_field_integral(x, abs(r - center), disk, params)
                           for x, r in zip(distances, rx)])
    else:
        offset = np.zeros(len(distances))
    return Layout(params.lam * math.pi * disk * disk, disk, center, rx, gain, offset)


def _blocks(trials: int, size: int):
    return [(s, min(s + size, trials)) for s in range(0, trials, size)]


def _run_block(job):
    backend, fn, args = job
    return getattr(BACKENDS[backend], fn)(*args)


def _dispatch(config: SimConfig, fn: str, make_args):
    backend = config.backend or DEFAULT_BACKEND
    jobs = [(backend, fn, make_args(a, b)) for a, b in _blocks(config.trials, config.block_size)]
    if config.workers == 1 or len(jobs) == 1:
        parts = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    return np.concatenate(parts, axis=0)


def simulate_first_success(distances: Sequence[float], horizons: Sequence[int],
                           params: NetworkParams, config: SimConfig) -> np.ndarray:
    """First decoded slot for every trial and hop; 0 when the hop's horizon ran out.

    Hops are simulated one after another on the same field; every hop is
    run even when an earlier one failed, so per-hop marginals are always
    available.
    """
    lay = route_layout(distances, params, config)
    hz = np.asarray(horizons, dtype=np.int32)

    def args(a, b):
        return (config.seed, a, b, lay.mean_count, lay.disk_radius, lay.center_x, lay.rx_x,
                lay.gain, lay.offset, hz, params.p, params.alpha, config.resample_locations)

    return _dispatch(config, "run_trials", args)


def outage_slots(d: float, params: NetworkParams, config: SimConfig,
                 n_slots: int = 2) -> np.ndarray:
    """SIR outage indicators of a single link of length ``d`` over consecutive slots."""
    lay = route_layout([d], params, config)

    def args(a, b):
        return (config.seed, a, b, lay.mean_count, lay.disk_radius, lay.center_x,
                float(lay.rx_x[0]), float(lay.gain[0]), float(lay.offset[0]), n_slots,
                params.p, params.alpha, config.resample_locations)

    return _dispatch(config, "run_outage_slots", args)


def hop_delays(first: np.ndarray, budgets: Sequence[int], convention: str):
    """Per-trial success flags and per-hop slot counts under a delay convention."""
    budgets = np.asarray(budgets, dtype=np.int64)
    first = first.astype(np.int64)
    ok = (first >= 1) & (first <= budgets + 1)
    slots = np.where(ok, first, budgets + 1)
    success = ok.all(axis=1)
    if convention == "stop-on-failure":
        reached = np.ones_like(ok)
        reached[:, 1:] = np.cumprod(ok, axis=1)[:, :-1].astype(bool)
        slots = np.where(reached, slots, 0)
    return success, slots


def _z(confidence: float) -> float:
    return NormalDist().inv_cdf(0.5 + 0.5 * confidence)


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> Interval:
    z = _z(confidence)
    phat = successes / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return Interval(phat, max(0.0, centre - half), min(1.0, centre + half))


def summarize(first: np.ndarray, budgets: Sequence[int], params: NetworkParams,
              config: SimConfig) -> SimEstimate:
    success, slots = hop_delays(first, budgets, config.delay_convention)
    delay = slots.sum(axis=1)
    n = int(success.shape[0])
    s1 = int(success.sum())
    m1 = int(delay.sum())
    m2 = int((delay * delay).sum())
    sm = int(delay[success].sum())
    z = _z(config.confidence)

    p_int = wilson_interval(s1, n, config.confidence)
    mean = m1 / n
    var = (m2 - n * mean * mean) / (n - 1) if n > 1 else math.inf
    half = z * math.sqrt(max(var, 0.0) / n)
    d_int = Interval(mean, mean - half, mean + half)

    scale = params.lam * params.rate
    ratio = s1 / m1 if m1 else math.nan
    cap = scale * ratio
    if n > 1 and m1:
        # delta method on the ratio of means
        zsum2 = s1 - 2 * ratio * sm + ratio * ratio * m2
        var_z = max(zsum2 / n, 0.0) / (mean * mean)
        c_half = z * scale * math.sqrt(var_z / n)
    else:
        c_half = math.inf
    c_int = Interval(cap, cap - c_half, cap + c_half)
    return SimEstimate(p_int, d_int, c_int, n, config.seed, config.delay_convention, s1, m1)


def estimate_success(plan: HopPlan, params: NetworkParams, config: SimConfig) -> SimEstimate:
    first = simulate_first_success(plan.distances, [b + 1 for b in plan.budgets], params, config)
    return summarize(first, plan.budgets, params, config)


def estimate_tc(plan: HopPlan, params: NetworkParams, config: SimConfig) -> TcResult:
    est = estimate_success(plan, params, config)
    return TcResult(est.capacity.value, est.p_success.value, est.mean_delay.value,
                    params.lam * params.rate, "simulated",
                    {"ci": (est.capacity.lo, est.capacity.hi), "estimate": est})


def simulate_packet(plan: HopPlan, params: NetworkParams, config: SimConfig,
                    trial_index: int) -> PacketOutcome:
    one = SimConfig(**{**config.__dict__, "trials": 1, "workers": 1})
    lay = route_layout(plan.distances, params, one)
    first = one.kernel().run_trials(
        config.seed, trial_index, trial_index + 1, lay.mean_count, lay.disk_radius,
        lay.center_x, lay.rx_x, lay.gain, lay.offset,
        np.array([b + 1 for b in plan.budgets], dtype=np.int32),
        params.p, params.alpha, config.resample_locations)
    success, slots = hop_delays(first, plan.budgets, config.delay_convention)
    per_hop = tuple(int(x) for x in slots[0])
    return PacketOutcome(bool(success[0]), per_hop, sum(per_hop))


def sample_network(params: NetworkParams, config: SimConfig, trial_index: int,
                   distances: Sequence[float] = (1.0,)) -> np.ndarray:
    """Interferer positions of one trial, as an (n, 2) array.

    These are the first draws of the trial's stream, so they are exactly
    the field that trial's packet simulation sees.
    """
    from ._streams import trial_generator

    lay = route_layout(distances, params, config)
    gen = trial_generator(config.seed, trial_index)
    x, y = _kernel_py.draw_field(gen, lay.mean_count, lay.disk_radius, lay.center_x)
    return np.column_stack([x, y])
