"""Exception types shared across the package."""


class NhqcError(Exception):
    """Base class for package-specific failures."""


class ConfigError(NhqcError):
    """Invalid experiment configuration (bad key, value, or file)."""


class NumericalError(NhqcError):
    """A numerical routine failed to meet its contract."""


class EigensolverError(NumericalError):
    """Dense eigendecomposition did not converge or missed the residual bound.

    ``index`` is the index of the offending eigenpair when known, else None.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class WindingError(NumericalError):
    """Phase continuation around a parameter loop could not be completed.

    ``nu`` carries the loop parameter value at which the failure occurred,
    when a single point is to blame (eigenvalue collision with the base
    energy); it is None for refinement-budget exhaustion.
    """

    def __init__(self, message, nu=None):
        super().__init__(message)
        self.nu = nu
