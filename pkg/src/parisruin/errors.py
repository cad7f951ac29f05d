"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class ResolutionError(ParameterError):
    """The grid step cannot resolve the requested Parisian window."""


class CovarianceError(ValueError):
    """A covariance model failed the positive-semidefiniteness check."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class DependencyError(ValueError):
    """A required constant (exact or Monte Carlo estimated) was not supplied."""


class OrderingError(ValueError):
    """Parisian ruin cannot precede classical ruin."""


class PartialResultWarning(UserWarning):
    """A Monte Carlo run hit its replication cap before reaching its target."""
