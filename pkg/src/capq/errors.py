"""Exception types shared across the package."""


class CapqError(Exception):
    """Base class for all errors raised by capq."""


class NumericalError(CapqError):
    """A numerical kernel failed.

    ``where`` names the originating ``module.operation`` so that the CLI can
    report it without a traceback.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where

    def __str__(self):
        msg = super().__str__()
        return f"{self.where}: {msg}" if self.where else msg


class QuadratureError(NumericalError):
    pass


class QuadratureDivergence(QuadratureError):
    """Running integral estimate exceeded the divergence threshold."""


class SearchError(NumericalError):
    pass


class HypothesisError(CapqError, ValueError):
    """Parameters fall outside the hypotheses of the bound being evaluated."""


class ParameterError(CapqError, ValueError):
    pass


class UsageError(CapqError, ValueError):
    """Malformed command-line specification.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
