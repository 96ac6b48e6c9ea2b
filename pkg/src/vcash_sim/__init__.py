"""Vehicle-cash event-trading market simulator.

A deterministic discrete-event simulation of a ring-road vehicular network
in which traffic events are traded on a roadside zoning market: vehicles
invest vehicle cash to announce events, earn proportional notification fees
while their events stay alive, and collect the escrow when they verify that
an event has ended.  Includes bogus/selfish attacker behaviors and an
entity-reputation baseline for comparison experiments.
"""

__version__ = "0.1.0"

from vcash_sim.errors import (
    ConfigError,
    ConservationError,
    ProtocolError,
    VcashSimError,
)

__all__ = [
    "ConfigError",
    "ConservationError",
    "ProtocolError",
    "VcashSimError",
    "__version__",
]
