"""Exception hierarchy shared across the package.

CLI exit codes: 0 success, 2 configuration error, 3 sampling budget
exhausted, 4 numerical failure.
"""


class QthermError(Exception):
    """Base class for all package-specific errors."""

    exit_code = 1


class ConfigError(QthermError):
    """Invalid or inconsistent experiment configuration."""

    exit_code = 2


class BudgetError(QthermError):
    """Rejection sampling exhausted its trial budget before reaching M."""

    exit_code = 3

    def __init__(self, message, trials=0, accepted=0):
        super().__init__(message)
        self.trials = trials
        self.accepted = accepted

    @property
    def acceptance_estimate(self):
        return self.accepted / self.trials if self.trials else 0.0


class NumericError(QthermError):
    """Numerical failure (eigensolver breakdown, solver nonconvergence)."""

    exit_code = 4

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
