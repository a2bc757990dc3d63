class QBallError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(QBallError, ValueError):
    pass


class SolverError(QBallError, RuntimeError):
    """A numerical procedure failed; ``info`` carries machine-readable detail."""

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = info


class EvaluationError(QBallError, ArithmeticError):
    pass
