"""Univariate global residues without root extraction.

For an ideal generated by a single polynomial P of degree nu with leading
coefficient c_nu, the global residue of f = P_f/Q_f is the sum over the
zeros of P of the local residues of f/P.  It equals a_nu/c_nu, where a_nu is
the top coefficient (of var^(nu-1)) of the reduction of P_f * Q_f^{-1}
modulo P.  Everything stays inside the coefficient field.
"""
from __future__ import annotations

from dataclasses import dataclass

from .algebra import MultiPoly, RatFunc, UniPoly
from .algebra.univariate import _as_uni, inverse_mod, residue_class
from .errors import AlgebraError, NotCoprime


@dataclass(frozen=True)
class GlobalResidueProblem:
    var: str
    P: UniPoly
    P_f: UniPoly
    Q_f: UniPoly

    @property
    def nu(self) -> int:
        return self.P.degree()

    @property
    def c_nu(self) -> RatFunc:
        return self.P.lc()

    def solve(self) -> RatFunc:
        return _global_residue_uni(self.P_f, self.Q_f, self.P)


def _ideal_generator(P, var) -> UniPoly:
    up = _as_uni(P, var)
    if up.degree() < 1:
        raise AlgebraError("the ideal generator must have positive degree")
    return up


def polynomial_inverse(Q_f, P, var: str):
    """Q~ with Q~ * Q_f = 1 mod P and deg Q~ < deg P.

    Returns a ``UniPoly`` for ``UniPoly`` input and a ``RatFunc`` otherwise.
    """
    up = _ideal_generator(P, var)
    uq = _as_uni(Q_f, var, up.registry)
    inv = inverse_mod(uq, up)
    if isinstance(Q_f, UniPoly):
        return inv
    return inv.to_ratfunc()


def _global_residue_uni(P_f: UniPoly, Q_f: UniPoly, P: UniPoly) -> RatFunc:
    nu = P.degree()
    num = P_f % P
    if num.is_zero():
        return P.registry.zero()
    if Q_f.degree() > 0 or Q_f.is_zero():
        num = (num * inverse_mod(Q_f, P)) % P
    else:
        num = num.scale(Q_f.lc().inverse())
    return num.coeff(nu - 1) / P.lc()


def global_residue(P_f, Q_f, P, var: str) -> RatFunc:
    """Sum over the zeros z0 of P of Res_{z0} (P_f/Q_f)/P."""
    up = _ideal_generator(P, var)
    reg = up.registry
    return _global_residue_uni(_as_uni(P_f, var, reg), _as_uni(Q_f, var, reg), up)


def global_residue_of(f: RatFunc, P, var: str) -> RatFunc:
    """Global residue of a rational function f with respect to <P>."""
    up = _ideal_generator(P, var)
    if f.is_zero():
        return up.registry.zero()
    cls = residue_class(f, up)
    return cls.coeff(up.degree() - 1) / up.lc()


def bezoutian_dual(P, var: str) -> list:
    """Dual basis w_1..w_nu to the monomials 1, z, ..., z^(nu-1).

    w_j = sum_{k=0}^{nu-j} c_{k+j} z^k, with c_i the coefficients of P.
    """
    up = _ideal_generator(P, var)
    nu = up.degree()
    out = []
    for j in range(1, nu + 1):
        out.append(UniPoly(up.registry, var, [up.coeff(k + j) for k in range(nu - j + 1)]))
    if isinstance(P, UniPoly):
        return out
    return [w.to_ratfunc() for w in out]


__all__ = ["GlobalResidueProblem", "polynomial_inverse", "global_residue",
           "global_residue_of", "bezoutian_dual", "NotCoprime"]
