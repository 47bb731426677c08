"""Transmission capacity of ad hoc networks with ARQ retransmissions."""
from .model import HopPlan, NetworkParams, ParameterError, SuccessProfile, TcResult

__version__ = "0.1.0"
__all__ = ["HopPlan", "NetworkParams", "ParameterError", "SuccessProfile", "TcResult"]
