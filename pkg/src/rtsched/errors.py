"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-range input (bad index, dimension mismatch, invalid distribution)."""


class CapacityError(RuntimeError):
    """An exact search or enumeration exceeded its configured budget."""


class VisibilityError(RuntimeError):
    """A scheduler tried to read channel state it is not allowed to see yet."""
