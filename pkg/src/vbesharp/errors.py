"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A structural precondition fails (e.g. a distribution is not zero-mean)."""


class InvariantError(RuntimeError):
    """A mathematical invariant that should hold was violated by the data."""


class BracketError(RuntimeError):
    """A root bracket that theory guarantees failed its sign condition."""


class ResourceLimitError(RuntimeError):
    """An exact enumeration would exceed its configured size cap."""


class ConfigurationError(ValueError):
    """A numerical configuration parameter is unusable (e.g. grid too coarse)."""
