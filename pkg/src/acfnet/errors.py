"""Exception types raised across the package."""


class AcfError(Exception):
    """Base class for all package errors."""


class InvalidArgument(AcfError, ValueError):
    pass


class InvalidState(AcfError, RuntimeError):
    pass


class UnsupportedConfiguration(AcfError, ValueError):
    """The requested parameters fall outside the validity of a closed form."""


class NumericalFailure(AcfError, RuntimeError):
    """An integrator or solver did not meet its accuracy contract.

    ``diagnostics`` carries whatever the failing routine could report
    (time reached, residual, offending eigenvalue, ...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class NonUniqueSteadyState(AcfError, RuntimeError):
    def __init__(self, kernel_dim, message=None):
        self.kernel_dim = kernel_dim
        super().__init__(message or f"steady manifold is degenerate (kernel dimension {kernel_dim})")


class ConfigError(AcfError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
