"""Exception types shared across the package."""


class SprIdentError(Exception):
    """Base class for all package errors."""


class ConfigError(SprIdentError):
    """Invalid or inconsistent configuration."""


class ParseError(SprIdentError):
    """Malformed input file."""


class EvaluationError(SprIdentError):
    """Frequency-response evaluation hit a (near) pole on the unit circle."""


class InfeasibleError(SprIdentError):
    """The constraint set of a QP admits no solution."""

    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence


class NumericalError(SprIdentError):
    """A numerical routine failed to converge."""

    def __init__(self, message, best_iterate=None):
        super().__init__(message)
        self.best_iterate = best_iterate
