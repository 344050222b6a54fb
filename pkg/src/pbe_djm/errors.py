"""Typed errors raised across the package.

Every error carries a stable ``code`` string so batch drivers can report
failures without parsing messages.
"""


class PBEError(Exception):
    """Base class for all package errors."""

    code = "PBE_ERROR"


class DivergentTail(PBEError):
    code = "DIVERGENT_TAIL"


class DivergentMoment(PBEError):
    code = "DIVERGENT_MOMENT"


class UnsupportedClass(PBEError):
    """An operation would leave the exponential-polynomial term class."""

    code = "UNSUPPORTED_CLASS"


class MixedRates(PBEError):
    code = "MIXED_RATES"


class MissingRadius(PBEError):
    code = "MISSING_RADIUS"


class TermBlowup(PBEError):
    """Raised when a series computation exceeds its term-count cap.

    ``series`` holds the components that were completed before the cap was
    hit (or ``None``).
    """

    code = "TERM_BLOWUP"

    def __init__(self, message, series=None):
        super().__init__(message)
        self.series = series


class UnknownExample(PBEError):
    code = "UNKNOWN_EXAMPLE"


class QuadratureFailure(PBEError):
    code = "QUADRATURE_FAILURE"


class OracleBlowup(PBEError):
    code = "BLOWUP"


class NoExactSolution(PBEError):
    code = "NO_EXACT_SOLUTION"


class ConfigError(PBEError):
    """Invalid case configuration; ``line`` and ``field`` locate the problem."""

    code = "CONFIG_ERROR"

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = (", ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
