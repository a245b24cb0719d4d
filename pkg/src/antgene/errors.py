"""Exception types shared across the package."""


class AntgeneError(Exception):
    """Base class for all package-specific errors."""


class TsplibParseError(AntgeneError, ValueError):
    """Malformed or unsupported TSPLIB input; the message names the offending field or line."""


class InvalidTourError(AntgeneError, ValueError):
    """A city sequence that is not a permutation of 0..n-1, or tours from mismatched instances."""


class InstanceTooLargeError(AntgeneError, ValueError):
    """An exact oracle was asked to solve an instance above its size limit."""


class ParameterError(AntgeneError, ValueError):
    """A tunable parameter is outside its documented range."""


class DegenerateDistributionError(AntgeneError, ArithmeticError):
    """Every transition weight collapsed to zero (numeric underflow)."""

    def __init__(self, message, ant=None, iteration=None):
        super().__init__(message)
        self.ant = ant
        self.iteration = iteration
