class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConsistencyError(RuntimeError):
    """An internal numerical identity failed (a convention bug, not bad input)."""


class StructuralError(RuntimeError):
    """The representation-theoretic situation does not admit the requested construction."""
