"""Exception types shared across the package.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch one thing; the CLI maps every one of them to exit 1.
"""


class ConfigurationError(ValueError):
    """Solver or run parameters out of their allowed range."""


class PreconditionError(ValueError):
    """A hypothesis of the requested check does not hold."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a formula."""


class RangeError(ValueError):
    """Query outside the precomputed radial range of a model."""


class UnsupportedProfileError(ValueError):
    """Profile family not allowed for the requested operation."""


class AdmissibilityError(ValueError):
    """Model violates the curvature bound required by a theorem check."""

    def __init__(self, message, margin):
        super().__init__(message)
        self.margin = margin
