"""Exception hierarchy. ``exit_code`` is what the CLI returns for each."""


class SchrodecayError(Exception):
    exit_code = 1


class InvalidArgumentError(SchrodecayError, ValueError):
    exit_code = 2


class ConfigError(InvalidArgumentError):
    exit_code = 2


class InvariantError(SchrodecayError, ValueError):
    exit_code = 2


class NumericalError(SchrodecayError, ArithmeticError):
    """Raised when an iterative method fails; carries a diagnostic value."""

    exit_code = 3

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic


class StepSizeError(NumericalError):
    pass


class StatisticalPreconditionError(SchrodecayError):
    exit_code = 4
