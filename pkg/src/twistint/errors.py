"""Exception hierarchy.

Errors fall into families that the command line maps onto exit codes:
parse problems, violated structural assumptions (the fibration or the
connection is unusable as given) and genericity failures (a linear system
that should be invertible for generic exponents is not).
"""
from __future__ import annotations


class TwistIntError(Exception):
    """Base class. ``level`` is filled in when an error crosses a recursion level."""

    level: int | None = None

    def at_level(self, level: int) -> "TwistIntError":
        if self.level is None:
            self.level = level
        return self

    def __str__(self) -> str:
        msg = super().__str__()
        if self.level is not None:
            return f"[level {self.level}] {msg}"
        return msg


# -- algebra -----------------------------------------------------------------

class AlgebraError(TwistIntError, ValueError):
    pass


class RegistryMismatch(AlgebraError):
    pass


class UndeclaredName(TwistIntError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument; we don't want that
        return TwistIntError.__str__(self)


class SubstitutionError(AlgebraError):
    pass


# -- genericity (exit code 3) -------------------------------------------------

class GenericityError(TwistIntError):
    pass


class SingularSystem(GenericityError):
    pass


class NotCoprime(GenericityError):
    pass


# -- assumptions (exit code 2) ------------------------------------------------

class AssumptionError(TwistIntError):
    pass


class NotZeroDimensional(AssumptionError):
    pass


class HigherPoleConnection(AssumptionError):
    pass


class DegenerateFibration(AssumptionError):
    def __init__(self, message: str, suggestion: str | None = None,
                 found: int | None = None, expected: int | None = None):
        super().__init__(message)
        self.suggestion = suggestion
        self.found = found
        self.expected = expected


class ReductionLimit(AssumptionError):
    pass


class NonGenericExponent(AssumptionError):
    pass


class SingularCMatrix(AssumptionError):
    pass


# -- oracle (exit code 4) -----------------------------------------------------

class OracleError(TwistIntError):
    pass


class RootClustering(OracleError):
    pass


class ToleranceExceeded(OracleError):
    pass


class ResonantSample(OracleError):
    """A local exponent became an integer at the sample; local solutions need logarithms."""


# -- front end (exit code 1) --------------------------------------------------

class ParseError(TwistIntError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None and col is not None:
            where = f"line {line}, column {col}: "
        elif col is not None:
            where = f"column {col}: "
        super().__init__(where + message)
