"""Exception types shared across the package."""


class AqecError(Exception):
    """Base class for all package errors."""


class InvalidArgument(AqecError, ValueError):
    pass


class UnsupportedManifold(InvalidArgument):
    pass


class TruncationTooSmall(AqecError):
    pass


class IntegrationFailure(AqecError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FitFailure(AqecError, RuntimeError):
    def __init__(self, message, residual_trace=None):
        super().__init__(message)
        self.residual_trace = residual_trace or []
