"""Transmit waveform design for dual-function MIMO radar and multi-user communication.

Subpackages and modules
-----------------------
model
    System configuration, channel and symbol generation, MUI and sum-rate metrics.
closed_form
    Minimum-MUI waveforms with an exactly prescribed radar covariance.
tradeoff
    Weighted radar/communication trade-off solved as a trust-region subproblem.
bnb
    Global branch-and-bound for constant-modulus waveforms with a similarity constraint.
radar_tools
    Reference chirps and pulse compression.
bench
    Seeded Monte-Carlo harness behind the ``radcom`` command.
"""
from .exceptions import DegenerateNodeError, NotPositiveDefiniteError, NumericalFailure, SingularChannelError
from .model import SystemConfig

__version__ = "0.1.0"

__all__ = [
    "SystemConfig",
    "SingularChannelError",
    "NotPositiveDefiniteError",
    "NumericalFailure",
    "DegenerateNodeError",
    "__version__",
]
