"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands live in tensor algebras with different alphabet size or level cap."""


class ResolventDivergenceError(ValueError):
    """Resolvent requested for a tensor whose scalar part has modulus >= 1."""


class KernelDomainError(ValueError):
    """A kernel was evaluated at a lag where it is not defined."""
