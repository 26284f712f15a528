"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent parameters (bad sparsity, empty ranges, unknown keys)."""


class DomainError(ValueError):
    """An argument outside the mathematical domain of an operation."""


class NumericalError(ArithmeticError):
    """A linear-algebra step failed (singular system, non-finite result)."""
