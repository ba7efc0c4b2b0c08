class MbsimError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(MbsimError, ValueError):
    pass


class ConfigurationError(MbsimError, ValueError):
    """A strategy was configured outside the hypotheses it relies on."""


class ProtocolViolation(MbsimError):
    """A player tried an illegal move; ``offender`` names the player."""

    def __init__(self, message: str, offender: str | None = None):
        super().__init__(message)
        self.offender = offender


class InvariantViolation(MbsimError, AssertionError):
    """An internal invariant that should be impossible to break was broken."""
