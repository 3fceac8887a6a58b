"""Exception hierarchy shared by every relaylab module.

The split mirrors how failures surface operationally: bad arguments and
malformed inputs are *data* problems (CLI exit 2, HTTP 422 kind="data"),
iterative solvers that fail to settle are *convergence* problems (CLI
exit 3, HTTP 422 kind="convergence").
"""


class RelayLabError(Exception):
    """Base class for all errors raised by relaylab."""


class ParameterError(RelayLabError):
    """An operation was called with arguments violating its preconditions."""


class ParseError(RelayLabError):
    """A file or text payload does not conform to its format."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ConfigError(RelayLabError):
    """A configuration document is invalid or internally inconsistent."""


class InsufficientDataError(RelayLabError):
    """Not enough samples/snapshots to compute the requested quantity."""


class UndefinedMetricError(RelayLabError):
    """The requested metric is mathematically undefined on this input."""


class ConvergenceError(RelayLabError):
    """An iterative solver did not converge within its iteration budget."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (last residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class DegenerateSpectrumError(ConvergenceError):
    """The spectrum carries no usable dominant eigenpair (e.g. zero matrix)."""

    def __init__(self, message: str):
        super().__init__(message)
