"""Exception types shared across the package."""


class PedbrakeError(ValueError):
    """Base class for all validation errors raised by this package."""


class InvalidInputError(PedbrakeError):
    """A runtime input (state, force, measurement) is out of domain."""


class InvalidParameterError(PedbrakeError):
    """A physical parameter set violates its constraints."""


class ConfigurationError(PedbrakeError):
    """A run configuration value (time step, horizon, ...) is unusable."""


class DegenerateSystemError(PedbrakeError):
    """A polynomial or system that is not actually second order."""
