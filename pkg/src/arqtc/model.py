"""Domain types and shared constants.

Density convention: ``lam`` is the density of the Poisson field of
potential transmitters.  Their locations persist over slots and each one
is independently active in a slot with probability ``p``.  The ALOHA
thinning therefore lives inside the interference kernel, never in ``lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence


class ParameterError(ValueError):
    """Base class for out-of-range model parameters."""


class InvalidDensity(ParameterError):
    pass


class InvalidAccessProbability(ParameterError):
    pass


class InvalidPathLoss(ParameterError):
    pass


class InvalidThreshold(ParameterError):
    pass


class InvalidHopPlan(ParameterError):
    pass


@dataclass(frozen=True)
class NetworkParams:
    """Physical and protocol constants of the network.

    Parameters
    ----------
    lam : float
        Density of potential transmitters (nodes per m^2).
    p : float
        ALOHA access probability in (0, 1].
    alpha : float
        Path-loss exponent, strictly greater than 2.
    beta : float
        Linear SIR decoding threshold.
    """

    lam: float
    p: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidDensity(f"density must be > 0, got {self.lam!r}")
        if not (0 < self.p <= 1):
            raise InvalidAccessProbability(f"access probability must be in (0, 1], got {self.p!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 2):
            raise InvalidPathLoss(f"path-loss exponent must be > 2, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise InvalidThreshold(f"SIR threshold must be > 0, got {self.beta!r}")

    @property
    def rate(self) -> float:
        """Spectral efficiency log2(1 + beta) in bits/sec/Hz."""
        return math.log2(1.0 + self.beta)

    def replace(self, **changes) -> "NetworkParams":
        values = dict(lam=self.lam, p=self.p, alpha=self.alpha, beta=self.beta)
        values.update(changes)
        return NetworkParams(**values)


@dataclass(frozen=True)
class HopPlan:
    """Per-hop distances and retransmission budgets of one route."""

    distances: tuple[float, ...]
    budgets: tuple[int, ...]

    def __init__(self, distances: Sequence[float], budgets: Sequence[int]):
        distances = tuple(float(x) for x in distances)
        budgets = tuple(int(b) for b in budgets)
        if len(distances) == 0:
            raise InvalidHopPlan("a route needs at least one hop")
        if len(distances) != len(budgets):
            raise InvalidHopPlan(
                f"{len(distances)} distances but {len(budgets)} budgets"
            )
        if any(not (math.isfinite(x) and x > 0) for x in distances):
            raise InvalidHopPlan(f"hop distances must be > 0, got {distances}")
        if any(b < 0 for b in budgets):
            raise InvalidHopPlan(f"budgets must be non-negative, got {budgets}")
        object.__setattr__(self, "distances", distances)
        object.__setattr__(self, "budgets", budgets)

    @classmethod
    def equidistant(cls, d: float, n_hops: int, budget_per_hop: int) -> "HopPlan":
        return cls([d / n_hops] * n_hops, [budget_per_hop] * n_hops)

    @property
    def n_hops(self) -> int:
        return len(self.distances)

    @property
    def total_distance(self) -> float:
        return math.fsum(self.distances)

    @property
    def total_budget(self) -> int:
        return sum(self.budgets)


@dataclass(frozen=True)
class SuccessProfile:
    """Slot-resolved success probabilities of a single hop.

    ``per_slot[j-1]`` is the probability that the packet is first decoded
    in slot ``j``.  ``condition`` is the worst condition number seen in the
    alternating sums (1 means no cancellation).
    """

    per_slot: tuple[float, ...]
    total: float
    expected_delay: float
    condition: float = 1.0

    @property
    def unstable(self) -> bool:
        return self.condition > 1e10


PROVENANCES = ("exact", "lower-bound", "upper-bound", "simulated")


@dataclass(frozen=True)
class TcResult:
    """Transmission capacity together with the pieces it was built from."""

    capacity: float
    success: float
    delay: float
    density_rate: float
    provenance: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @classmethod
    def compose(cls, params: NetworkParams, success: float, delay: float,
                provenance: str, **meta) -> "TcResult":
        density_rate = params.lam * params.rate
        return cls(density_rate * success / delay, success, delay,
                   density_rate, provenance, meta)


def outage_constant(params: NetworkParams) -> float:
    """Geometry constant 2 pi^2 csc(2 pi / alpha) / alpha.

    Multiplied by ``p d^2 beta^(2/alpha)`` it gives the area integral of the
    single-slot interference kernel.
    """
    a = params.alpha
    return 2.0 * math.pi ** 2 / (a * math.sin(2.0 * math.pi / a))


def q_hat(q: float, p: float) -> float:
    """Per-slot probability of no decoding: idle with 1-p or outage with p*q."""
    return 1.0 - p + p * q
