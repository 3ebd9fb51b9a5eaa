"""Exact intersection numbers of twisted cocycles without algebraic extensions."""
from .algebra import MultiPoly, RatFunc, VarRegistry
from .cohomology import CohomologyBasis, Twist, check_assumptions, cohomology_dim
from .errors import (
    AssumptionError, DegenerateFibration, GenericityError, OracleError, ParseError,
    TwistIntError,
)
from .intersect import FibrationPlan, intersection_number
from .parsing import parse_ratfunc

__version__ = "0.1.0"

__all__ = [
    "MultiPoly", "RatFunc", "VarRegistry", "CohomologyBasis", "Twist", "check_assumptions",
    "cohomology_dim", "AssumptionError", "DegenerateFibration", "GenericityError",
    "OracleError", "ParseError", "TwistIntError", "FibrationPlan", "intersection_number",
    "parse_ratfunc",
]
