"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument does not satisfy an operation's precondition."""


class SizeLimitError(RuntimeError):
    """A point set, grid or word table would exceed its configured cap."""


class EstimationError(ValueError):
    """Not enough data to form a numerical estimate."""


class InvariantViolation(AssertionError):
    """A property that must hold at runtime failed."""
