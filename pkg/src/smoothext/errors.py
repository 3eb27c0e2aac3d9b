"""Exception types shared by all modules."""


class ContractViolation(ValueError):
    """Operands violate an operation's preconditions (mismatched base points,
    orders, grids, ...)."""


class DomainError(ValueError):
    """A point, stencil or value lies outside the domain an operation needs."""


class ConstructionError(RuntimeError):
    """An extension or partition could not be built from the given data."""
