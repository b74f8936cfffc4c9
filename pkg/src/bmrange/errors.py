"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(ArithmeticError):
    """A truncated series could not be driven below its tail tolerance."""


class DegeneratePathError(ValueError):
    """A path or bar has zero range, so its s-stat is undefined."""


class InsufficientSampleError(ValueError):
    """Too few observations for the requested statistic."""


class FormatError(ValueError):
    """Input file does not follow the expected layout."""
