"""Exception hierarchy shared by the library and the command-line front end."""


class OmitSenseError(Exception):
    """Base class for all package errors."""


class ConfigError(OmitSenseError, ValueError):
    """Malformed configuration: missing key, unknown unit, bad value."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None and key not in message:
            message = f"{key}: {message}"
        super().__init__(message)


class ParameterError(ConfigError):
    """A physical parameter violates a model invariant."""


class NumericalError(OmitSenseError, ArithmeticError):
    """Generic numerical failure (singular system, failed self-consistency)."""


class SingularSystemError(NumericalError):
    pass


class SimulationDivergence(NumericalError):
    """The time integration blew up or the step size underflowed."""

    def __init__(self, message, t_reached):
        self.t_reached = t_reached
        super().__init__(f"{message} (integration reached t = {t_reached:.6g} ns)")


class InversionError(OmitSenseError, ValueError):
    """A measured K_st cannot be mapped back onto a mass."""
