"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point or parameter lies outside the region where a formula applies."""


class RootNotBracketed(RuntimeError):
    """No sign change was found for a scalar equation on its search interval."""


class InfeasibleError(RuntimeError):
    """A numerical construction could not satisfy its constraints."""
