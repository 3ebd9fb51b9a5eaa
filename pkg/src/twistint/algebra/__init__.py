"""Exact polynomial and rational-function kernel."""
from .poly import (
    MultiPoly, RatFunc, VarRegistry, as_ratfunc, derivative, gcd_poly, poly_arith,
    ratfunc_normalize, substitute, transfer,
)
from .univariate import (
    FracTerm, PoleData, UniPoly, UniView, extended_euclid, infinity_order, inverse_mod,
    partial_fractions, pole_data, poly_divmod, residue_class, squarefree_factor,
)
from .linalg import (
    adjugate, determinant, identity, inverse, linear_solve_exact, matmul, nullspace, rank,
    transpose,
)

__all__ = [
    "MultiPoly", "RatFunc", "VarRegistry", "as_ratfunc", "derivative", "gcd_poly",
    "poly_arith", "ratfunc_normalize", "substitute", "transfer",
    "FracTerm", "PoleData", "UniPoly", "UniView", "extended_euclid", "infinity_order",
    "inverse_mod", "partial_fractions", "pole_data", "poly_divmod", "residue_class",
    "squarefree_factor",
    "adjugate", "determinant", "identity", "inverse", "linear_solve_exact", "matmul",
    "nullspace", "rank", "transpose",
]
