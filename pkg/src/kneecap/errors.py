"""Exception types shared across the package."""


class KneecapError(Exception):
    """Base class for every error this package raises on bad input or config.

    The CLI maps these to exit code 2 (user/input error); anything else
    that escapes is an internal error (exit code 1).
    """


class ParseError(KneecapError):
    """Malformed CSV or manifest content."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DomainError(KneecapError):
    """Values outside the physically or mathematically valid domain."""


class InsufficientDataError(KneecapError):
    """Too few samples to run the requested operation."""


class ConfigurationError(KneecapError):
    """Inconsistent or out-of-range algorithm parameters."""


class DegenerateInputError(KneecapError):
    """Input carries no structure the algorithm could work with
    (e.g. constant curvature, so no knee is detectable)."""


class DegeneratePhaseError(KneecapError):
    """A degradation phase is too short for spectral estimation."""

    def __init__(self, message, phase=None):
        super().__init__(message)
        self.phase = phase
