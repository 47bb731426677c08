"""Monte Carlo simulator with a compiled kernel and a numpy fallback.

The compiled kernel is used when it imports; set ``ARQTC_PURE_PYTHON=1`` to
force the fallback.  Both consume identical random streams and return
identical results.
"""
from .engine import (BACKENDS, DEFAULT_BACKEND, DELAY_CONVENTIONS, GEOMETRIES, Interval,
                     PacketOutcome, SimConfig, SimEstimate, auto_region_radius,
                     estimate_success, estimate_tc, far_field_integral, hop_delays,
                     outage_slots, route_layout, sample_network, simulate_first_success,
                     simulate_packet, summarize, wilson_interval)

BACKEND = DEFAULT_BACKEND

__all__ = [
    "BACKEND", "BACKENDS", "DELAY_CONVENTIONS", "GEOMETRIES", "Interval", "PacketOutcome",
    "SimConfig", "SimEstimate", "auto_region_radius", "estimate_success", "estimate_tc",
    "far_field_integral", "hop_delays", "outage_slots", "route_layout", "sample_network",
    "simulate_first_success", "simulate_packet", "summarize", "wilson_interval",
]
