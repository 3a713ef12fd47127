"""Exception types shared across the package."""


class WbaError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(WbaError):
    """Invalid run configuration (bad weights, budgets, missing seed, ...)."""


class PrecisionExhausted(WbaError):
    """The working precision needed exceeds the configured ceiling.

    Carries ``needed_bits`` and ``ceiling`` when known.
    """

    def __init__(self, message, needed_bits=None, ceiling=None):
        super().__init__(message)
        self.needed_bits = needed_bits
        self.ceiling = ceiling


class UncertifiableComparison(WbaError):
    """Interval comparison still overlaps at the precision ceiling and no
    exact fallback applies.  Never resolved silently; callers decide policy.
    """

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context


class BoundaryAmbiguous(WbaError):
    """A membership inequality sits within interval width of a region
    boundary (or exactly on the tie set) and cannot be certified."""


class EnumerationBudgetExceeded(WbaError):
    """A lattice-point enumeration would visit more candidates than allowed."""


class AmbiguityBudgetExceeded(WbaError):
    """Too many Monte Carlo samples had to be discarded as ambiguous."""


class InsufficientHorizon(WbaError):
    """Not enough overlapping terms to certify prefix equivalence."""
