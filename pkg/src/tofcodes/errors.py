"""Exception types raised across the package."""


class ToFCodesError(Exception):
    """Base class for all package errors."""


class ConfigError(ToFCodesError, ValueError):
    pass


class NonIntegerCodeLength(ConfigError):
    pass


class DimensionMismatch(ToFCodesError, ValueError):
    pass


class ZeroColumn(ToFCodesError, ValueError):
    """A matrix column has zero norm, so normalized correlations are undefined."""

    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"column {self.index} has zero norm")


class SizeUnsupported(ToFCodesError, ValueError):
    pass


class KernelTooWide(ToFCodesError, ValueError):
    pass


class PoolExhausted(ToFCodesError, RuntimeError):
    """Every remaining combination was rejected before all columns were placed."""

    def __init__(self, placed, requested):
        self.placed = placed
        self.requested = requested
        super().__init__(
            f"pool exhausted at column {placed} ({placed} of {requested} columns placed)"
        )


class IllConditionedSubproblem(RuntimeWarning):
    """Least-squares refit on the selected support is rank deficient."""
