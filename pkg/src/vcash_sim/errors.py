"""Exception types shared across the simulator."""


class VcashSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(VcashSimError):
    """A simulation configuration failed validation."""


class ProtocolError(VcashSimError):
    """A market/protocol precondition was violated (indicates a bug)."""


class ConservationError(VcashSimError):
    """Total cash in the system drifted from its initial amount."""
