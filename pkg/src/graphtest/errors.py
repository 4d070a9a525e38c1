"""Exception hierarchy shared by every graphtest module."""


class GraphTestError(Exception):
    """Base class for all errors raised by graphtest."""


class ParameterError(GraphTestError, ValueError):
    """A model or generator parameter is outside its domain."""


class DomainError(GraphTestError, ValueError):
    """An operation was applied outside the inputs it is defined for."""


class CapacityError(GraphTestError):
    """An exact/brute-force routine was asked for an instance above its size cap."""


class ParseError(GraphTestError, ValueError):
    """Malformed edge-list or config input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(GraphTestError, ArithmeticError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")
