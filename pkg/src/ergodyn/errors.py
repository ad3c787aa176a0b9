"""Exception hierarchy shared across the package."""


class ErgodynError(Exception):
    """Base class for all errors raised by this package."""


class DimensionCapError(ErgodynError):
    """Requested Hilbert space exceeds the configured dimension cap."""


class DegenerateSpectrumError(ErgodynError):
    """Passive rearrangement requested for a Hamiltonian with degenerate levels."""


class GridError(ErgodynError):
    """A time grid does not meet the requirements of the integrator."""


class RefinementError(ErgodynError):
    """Integration step too coarse: conserved quantities drifted past tolerance."""


class ConfigError(ErgodynError):
    """Scenario configuration is invalid.  Carries field-level messages."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class EngineDisagreementError(ErgodynError):
    """Independent evolution engines disagree beyond tolerance."""

    def __init__(self, message, residuals=None):
        self.residuals = dict(residuals or {})
        super().__init__(message)
