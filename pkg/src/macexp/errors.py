"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input object violates a documented contract."""


class ConstructionError(RuntimeError):
    """Raised when a random construction cannot satisfy its requirements
    (e.g. a codebook request larger than the available type class)."""


class ScaleGuardError(RuntimeError):
    """Raised when a request exceeds the desk-scale enumeration guards
    instead of letting the process thrash."""
