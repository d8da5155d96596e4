"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ConfigurationError(ValueError):
    """Numerical configuration (mesh, descriptors) cannot be honoured."""


class NumericalError(ArithmeticError):
    """A computation produced non-finite or internally inconsistent values."""
