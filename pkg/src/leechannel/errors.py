"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvariantError(RuntimeError):
    """An internal consistency check failed (a bug, not a user error)."""
