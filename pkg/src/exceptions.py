"""Error hierarchy shared by the simulation, analysis and command-line layers."""

from pathlib import Path
from typing import Optional


class OptomechError(Exception):
    """Base class for all toolkit errors."""

    kind = "error"


class InvalidInputError(OptomechError, ValueError):
    """Non-finite state or parameters, wrong shapes, out-of-range options."""

    kind = "invalid_input"


class DivergenceError(OptomechError):
    """An integration left the blow-up bound or produced non-finite values."""

    kind = "divergence"

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class SingularDenominatorError(OptomechError):
    """The steady-state mechanical response is singular for these parameters."""

    kind = "singular_denominator"


class NotAFixedPointError(OptomechError, ValueError):
    """A state handed to the stability classifier does not satisfy rhs = 0."""

    kind = "not_a_fixed_point"

    def __init__(self, residual: float, tolerance: float):
        super().__init__(
            f"state is not a fixed point: residual {residual:.3e} exceeds {tolerance:.3e}"
        )
        self.residual = residual
        self.tolerance = tolerance


class ConfigError(OptomechError):
    """
    Configuration problem with a line-numbered diagnostic.

    ``kind`` is one of ``unknown_key``, ``malformed_number``, ``constraint``
    or ``syntax``. ``line`` is None for values given on the command line.
    """

    def __init__(self, kind: str, message: str, line: Optional[int] = None):
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{message}")
        self.kind = kind
        self.line = line
        self.detail = message


class OutputError(OptomechError):
    """Writing or reading a result file failed."""

    kind = "io"

    def __init__(self, path: Path, cause: Exception):
        super().__init__(f"{path}: {cause}")
        self.path = Path(path)
        self.cause = cause
