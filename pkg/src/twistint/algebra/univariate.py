"""Univariate views of rational functions.

One name is singled out as the active variable; every other registry name is
absorbed into the coefficient field.  Coefficients are ``RatFunc`` objects
free of the active variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..errors import AlgebraError, NotCoprime
from .poly import MultiPoly, RatFunc, VarRegistry, canonical_poly, _canon_pair


def raw_coefficients(raw, i: int, ctx) -> list:
    """Split a FLINT polynomial into its coefficients with respect to variable ``i``."""
    if raw.is_zero():
        return []
    buckets: dict[int, dict] = {}
    for exps, c in raw.terms():
        k = exps[i]
        e = list(exps)
        e[i] = 0
        buckets.setdefault(k, {})[tuple(e)] = c
    top = max(buckets)
    zero = ctx.constant(0)
    return [ctx.from_dict(buckets[k]) if k in buckets else zero for k in range(top + 1)]


def primitive_split(raw, i: int, ctx):
    """Return (content, primitive part) of ``raw`` viewed as a polynomial in variable ``i``."""
    coeffs = [c for c in raw_coefficients(raw, i, ctx) if not c.is_zero()]
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_one():
            break
        g = g.gcd(c)
    if g.is_one():
        return g, raw
    return g, raw / g


class UniPoly:
    """Dense polynomial in ``var`` with coefficients in the residual field."""

    __slots__ = ("registry", "var", "coeffs")

    def __init__(self, registry: VarRegistry, var: str, coeffs: Sequence[RatFunc]):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.registry = registry
        self.var = var
        self.coeffs = tuple(coeffs)

    # construction
    @classmethod
    def zero(cls, registry, var):
        return cls(registry, var, [])

    @classmethod
    def const(cls, registry, var, c):
        return cls(registry, var, [c])

    @classmethod
    def monomial(cls, registry, var, k: int, c=None):
        one = registry.one() if c is None else c
        return cls(registry, var, [registry.zero()] * k + [one])

    @classmethod
    def from_ratfunc(cls, f: RatFunc, var: str) -> "UniPoly":
        reg = f.registry
        i = reg.index(var)
        if f._d.degrees()[i] > 0:
            raise AlgebraError(f"{f} is not polynomial in {var}")
        parts = raw_coefficients(f._n, i, reg.ctx)
        if f._d.is_one():
            return cls(reg, var, [RatFunc(reg, c) for c in parts])
        return cls(reg, var, [RatFunc(reg, c, f._d) for c in parts])

    @classmethod
    def from_poly(cls, p, var: str) -> "UniPoly":
        if isinstance(p, MultiPoly):
            p = RatFunc.from_poly(p)
        return cls.from_ratfunc(p, var)

    # structure
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> RatFunc:
        return self.coeffs[-1]

    def coeff(self, k: int) -> RatFunc:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.registry.zero()

    def to_ratfunc(self) -> RatFunc:
        reg = self.registry
        if not self.coeffs:
            return reg.zero()
        i = reg.index(self.var)
        # common denominator, then a single normalization
        den = reg.ctx.constant(1)
        for c in self.coeffs:
            if not c._d.is_one() and den != c._d:
                g = den.gcd(c._d)
                den = den * (c._d / g)
        gen = reg.ctx.gen(i)
        num = reg.ctx.constant(0)
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            num = num + c._n * (den / c._d) * gen ** k
        return RatFunc(reg, num, den)

    def __repr__(self) -> str:
        return f"UniPoly[{self.var}]({self.to_ratfunc()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.var == other.var and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var, self.coeffs))

    # arithmetic
    def _new(self, coeffs):
        return UniPoly(self.registry, self.var, coeffs)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return self._new([self.coeff(k) + other.coeff(k) for k in range(n)])

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return self._new([self.coeff(k) - other.coeff(k) for k in range(n)])

    def __neg__(self):
        return self._new([-c for c in self.coeffs])

    def scale(self, c: RatFunc) -> "UniPoly":
        if c.is_zero():
            return self._new([])
        return self._new([a * c for a in self.coeffs])

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if isinstance(other, RatFunc):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return self._new([])
        zero = self.registry.zero()
        out = [zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return self._new(out)

    def derivative(self) -> "UniPoly":
        return self._new([c * k for k, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        db = other.degree()
        r = list(self.coeffs)
        if len(r) - 1 < db:
            return self._new([]), self
        inv = other.lc().inverse()
        q = [self.registry.zero()] * (len(r) - db)
        for k in range(len(r) - 1 - db, -1, -1):
            c = r[k + db]
            if c.is_zero():
                continue
            c = c * inv
            q[k] = c
            for j in range(db):
                b = other.coeffs[j]
                if not b.is_zero():
                    r[k + j] = r[k + j] - c * b
            r[k + db] = self.registry.zero()
        return self._new(q), self._new(r[:db])

    def __mod__(self, other: "UniPoly") -> "UniPoly":
        if self.degree() < other.degree():
            return self
        return self.divmod(other)[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.scale(self.lc().inverse())


def _as_uni(a, var: str, registry: VarRegistry | None = None) -> UniPoly:
    if isinstance(a, UniPoly):
        return a
    if isinstance(a, MultiPoly):
        return UniPoly.from_poly(a, var)
    if isinstance(a, RatFunc):
        return UniPoly.from_ratfunc(a, var)
    if registry is not None:
        return UniPoly.const(registry, var, registry.const(a))
    raise TypeError(f"cannot view {a!r} as a polynomial in {var}")


def poly_divmod(a, b, var: str) -> tuple[RatFunc, RatFunc]:
    """Division with remainder in ``var`` over the residual field."""
    ua = _as_uni(a, var)
    ub = _as_uni(b, var, ua.registry)
    if ub.degree() < 0:
        raise ZeroDivisionError(f"divisor is zero as a polynomial in {var}")
    q, r = ua.divmod(ub)
    return q.to_ratfunc(), r.to_ratfunc()


def uni_extended_euclid(a: UniPoly, b: UniPoly) -> tuple[UniPoly, UniPoly, UniPoly]:
    if a.is_zero() and b.is_zero():
        raise AlgebraError("extended Euclid needs a nonzero operand")
    reg, var = a.registry, a.var
    one = UniPoly.const(reg, var, reg.one())
    zero = UniPoly.zero(reg, var)
    r0, r1 = a, b
    s0, s1 = one, zero
    t0, t1 = zero, one
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    c = r0.lc().inverse()
    return r0.scale(c), s0.scale(c), t0.scale(c)


def extended_euclid(a, b, var: str):
    """Monic gcd g with s*a + t*b = g.

    Returns ``UniPoly`` objects when given them, ``RatFunc`` otherwise.
    """
    if isinstance(a, UniPoly) and isinstance(b, UniPoly):
        return uni_extended_euclid(a, b)
    ua = _as_uni(a, var)
    ub = _as_uni(b, var, ua.registry)
    g, s, t = uni_extended_euclid(ua, ub)
    return g.to_ratfunc(), s.to_ratfunc(), t.to_ratfunc()


def inverse_mod(a: UniPoly, m: UniPoly) -> UniPoly:
    """Inverse of ``a`` modulo ``m``; raises NotCoprime if they share a factor."""
    a = a % m
    if a.is_zero():
        raise NotCoprime("element vanishes modulo the ideal generator")
    g, s, _ = uni_extended_euclid(a, m)
    if g.degree() > 0:
        raise NotCoprime("operand and modulus are not coprime")
    return s % m


def residue_class(g: RatFunc, q: UniPoly) -> UniPoly:
    """Image of ``g`` in K[var]/(q); ``g`` must be regular on the zeros of q."""
    reg, var = q.registry, q.var
    i = reg.index(var)
    n = UniPoly(reg, var, [RatFunc(reg, c) for c in raw_coefficients(g._n, i, reg.ctx)])
    d = UniPoly(reg, var, [RatFunc(reg, c) for c in raw_coefficients(g._d, i, reg.ctx)])
    n = n % q
    if n.is_zero():
        return n
    if d.degree() == 0:
        return n.scale(d.lc().inverse())
    return (n * inverse_mod(d, q)) % q


# -- squarefree factorization ----------------------------------------------------

def _yun(f, i: int) -> list:
    fp = f.derivative(i)
    a = f.gcd(fp)
    b = f / a
    c = fp / a
    d = c - b.derivative(i)
    out = []
    k = 1
    while b.degrees()[i] > 0:
        a = b.gcd(d)
        b = b / a
        c = d / a
        d = c - b.derivative(i)
        if a.degrees()[i] > 0:
            out.append((a, k))
        k += 1
    return out


def squarefree_factor(p, var: str) -> list[tuple[MultiPoly, int]]:
    """Yun decomposition of ``p`` in ``var``; factors free of ``var`` are dropped as units.

    Output is sorted by decreasing multiplicity, then by canonical string.
    """
    if isinstance(p, RatFunc):
        if not p.is_polynomial():
            raise AlgebraError("squarefree_factor expects a polynomial")
        p = p.num
    if p.is_zero():
        raise AlgebraError("squarefree factorization of zero")
    reg = p.registry
    i = reg.index(var)
    raw = p._p
    if raw.degrees()[i] == 0:
        return []
    _, prim = primitive_split(raw, i, reg.ctx)
    facs = [(MultiPoly(reg, canonical_poly(q)), e) for q, e in _yun(prim, i)]
    facs.sort(key=lambda t: (-t[1], str(t[0])))
    return facs


# -- partial fractions -----------------------------------------------------------

@dataclass(frozen=True)
class FracTerm:
    q: MultiPoly          # squarefree, positive degree in the active variable
    order: int
    numer: UniPoly        # degree < deg q

    def to_ratfunc(self) -> RatFunc:
        return self.numer.to_ratfunc() / (RatFunc.from_poly(self.q) ** self.order)


@dataclass(frozen=True)
class UniView:
    active_var: str
    poly_part: UniPoly
    frac_terms: tuple = field(default_factory=tuple)

    def recombine(self) -> RatFunc:
        total = self.poly_part.to_ratfunc()
        for t in self.frac_terms:
            total = total + t.to_ratfunc()
        return total


def _refine(facs, var, reg):
    """Split squarefree factors into irreducibles over Q(other names) (display only)."""
    i = reg.index(var)
    out = []
    for q, e in facs:
        _, parts = q._p.factor()
        for r, _m in parts:
            if r.degrees()[i] > 0:
                out.append((MultiPoly(reg, canonical_poly(r)), e))
    out.sort(key=lambda t: (-t[1], str(t[0])))
    return out


def partial_fractions(f: RatFunc, var: str, refine: bool = False) -> UniView:
    """Partial fractions of ``f`` in ``var`` over squarefree denominator factors.

    With ``refine=True`` the squarefree factors are further split into
    irreducible factors; the reduction engine never needs that.
    """
    reg = f.registry
    i = reg.index(var)
    den = f._d
    if den.degrees()[i] == 0:
        return UniView(var, UniPoly.from_ratfunc(f, var), ())
    cont, prim = primitive_split(den, i, reg.ctx)
    num = UniPoly.from_ratfunc(RatFunc(reg, f._n, cont), var)
    dprim = UniPoly.from_poly(MultiPoly(reg, prim), var)
    poly_part, rem = num.divmod(dprim)
    facs = squarefree_factor(MultiPoly(reg, prim), var)
    if refine:
        facs = _refine(facs, var, reg)
    # prim = unit * prod q^e with the unit free of var
    prod = reg.ctx.constant(1)
    for q, e in facs:
        prod = prod * q._p ** e
    unit = RatFunc(reg, prim, prod)
    rem = rem.scale(unit.inverse())
    terms = []
    for idx, (q, e) in enumerate(facs):
        qu = UniPoly.from_poly(q, var)
        block = UniPoly.from_poly(MultiPoly(reg, q._p ** e), var)
        rest = reg.ctx.constant(1)
        for jdx, (q2, e2) in enumerate(facs):
            if jdx != idx:
                rest = rest * q2._p ** e2
        rest_u = UniPoly.from_poly(MultiPoly(reg, rest), var)
        a = (rem * inverse_mod(rest_u, block)) % block
        # q-adic digits: a = sum_k c_k q^k  ->  c_k / q^(e-k)
        k = 0
        while not a.is_zero():
            a, c = a.divmod(qu)
            if not c.is_zero():
                terms.append(FracTerm(q, e - k, c))
            k += 1
    terms.sort(key=lambda t: (str(t.q), -t.order))
    return UniView(var, poly_part, tuple(terms))


# -- pole bookkeeping ------------------------------------------------------------

@dataclass(frozen=True)
class PoleData:
    finite_orders: tuple      # of (q: MultiPoly, order)
    infinity_order: int | None  # None for the zero form

    def max_finite(self) -> int:
        return max((o for _, o in self.finite_orders), default=0)

    def is_simple(self) -> bool:
        inf_ok = self.infinity_order is None or self.infinity_order <= 1
        return inf_ok and self.max_finite() <= 1


def infinity_order(f: RatFunc, var: str) -> int | None:
    """Pole order at infinity of the one-form f*d(var)."""
    if f.is_zero():
        return None
    dn, dd = f.degree(var)
    return dn - dd + 2


def pole_data(f: RatFunc, var: str) -> PoleData:
    if f.is_zero():
        return PoleData((), None)
    finite = ()
    if f._d.degrees()[f.registry.index(var)] > 0:
        finite = tuple(squarefree_factor(f.den, var))
    return PoleData(finite, infinity_order(f, var))
