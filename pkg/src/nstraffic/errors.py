"""Exception types raised by the model and solver layers."""


class TrafficModelError(Exception):
    """Base class for all package errors."""


class DomainError(TrafficModelError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularityError(TrafficModelError, ZeroDivisionError):
    """A quantity diverges, e.g. the relaxation time when w -> 1."""


class DegenerateStateError(TrafficModelError, ValueError):
    """A conserved state has a density at or below the admissible floor."""


class QuadratureError(TrafficModelError, ArithmeticError):
    """Numerical quadrature failed to reach the requested accuracy."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class StepFailure(TrafficModelError, RuntimeError):
    """A solver step produced non-finite or negative values.

    Attributes:
        cells: indices of the offending cells.
        time: simulation time at the start of the failed step, if known.
        step_index: index of the failed step, if known.
    """

    def __init__(self, message, cells=(), time=None, step_index=None):
        self.reason = message
        self.cells = tuple(int(c) for c in cells)
        self.time = time
        self.step_index = step_index
        detail = message
        if self.cells:
            shown = ", ".join(str(c) for c in self.cells[:10])
            more = "" if len(self.cells) <= 10 else f" (+{len(self.cells) - 10} more)"
            detail += f" [cells: {shown}{more}]"
        if time is not None:
            detail += f" at t={time:.6g} s"
        if step_index is not None:
            detail += f", step {step_index}"
        super().__init__(detail)


class ConfigError(TrafficModelError, ValueError):
    """Invalid or unparsable configuration.

    Attributes:
        field: dotted key of the offending entry, if any.
        line: 1-based line number in the config file, if known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)
