"""Exact multivariate polynomials and rational functions over Q.

The heavy lifting (multiplication, exact division, multivariate gcd) is
delegated to FLINT's ``fmpq_mpoly``; everything here is bookkeeping around a
shared variable registry and the canonical form used for golden strings.
"""
from __future__ import annotations

import operator

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping

import flint

from ..errors import AlgebraError, RegistryMismatch, SubstitutionError, UndeclaredName

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class VarRegistry:
    """Ordered integration variables followed by ordered parameters.

    All polynomials built on one registry share a FLINT context whose monomial
    order is graded-lex with the first declared name largest.
    """

    __slots__ = ("z_vars", "params", "names", "_index", "ctx")

    def __init__(self, z_vars: Iterable[str], params: Iterable[str] = ()):
        z_vars = tuple(z_vars)
        params = tuple(params)
        names = z_vars + params
        for name in names:
            if not _IDENT.match(name):
                raise AlgebraError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise AlgebraError(f"duplicate names in registry: {names}")
        self.z_vars = z_vars
        self.params = params
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UndeclaredName(f"undeclared name {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return (isinstance(other, VarRegistry) and self.z_vars == other.z_vars
                and self.params == other.params)

    def __hash__(self) -> int:
        return hash((self.z_vars, self.params))

    def __repr__(self) -> str:
        return f"VarRegistry(z_vars={list(self.z_vars)}, params={list(self.params)})"

    # convenience constructors
    def poly(self, name: str) -> "MultiPoly":
        return MultiPoly(self, self.ctx.gen(self.index(name)))

    def var(self, name: str) -> "RatFunc":
        return RatFunc.from_poly(self.poly(name))

    def const(self, value) -> "RatFunc":
        return RatFunc(self, self.ctx.constant(_to_fmpq(value)), self.ctx.constant(1),
                       _canonical=True)

    def zero(self) -> "RatFunc":
        return self.const(0)

    def one(self) -> "RatFunc":
        return self.const(1)


def _to_fmpq(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, int):
        return flint.fmpq(value)
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, flint.fmpz):
        return flint.fmpq(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def fmpq_to_fraction(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


# -- canonical string ----------------------------------------------------------

def _monomial_str(names, exps) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _raw_terms_str(names, raw) -> str:
    if raw.is_zero():
        return "0"
    out = []
    for exps, c in raw.terms():
        mono = _monomial_str(names, exps)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if out:
            out.append(("-" if neg else "+") + body)
        else:
            out.append(("-" if neg else "") + body)
    return "".join(out)


def _is_plain_monomial(raw) -> bool:
    return len(raw) == 1 and raw.leading_coefficient() == 1


# -- MultiPoly -----------------------------------------------------------------

class MultiPoly:
    """Immutable polynomial with rational coefficients on a registry."""

    __slots__ = ("registry", "_p")

    def __init__(self, registry: VarRegistry, raw):
        self.registry = registry
        self._p = raw

    @classmethod
    def from_terms(cls, registry: VarRegistry, terms: Mapping[tuple, object]) -> "MultiPoly":
        data = {tuple(k): _to_fmpq(v) for k, v in terms.items() if v != 0}
        return cls(registry, registry.ctx.from_dict(data))

    @classmethod
    def const(cls, registry: VarRegistry, value) -> "MultiPoly":
        return cls(registry, registry.ctx.constant(_to_fmpq(value)))

    @property
    def terms(self) -> dict:
        return {tuple(e): fmpq_to_fraction(c) for e, c in self._p.terms()}

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            if other.registry is not self.registry and other.registry != self.registry:
                raise RegistryMismatch("polynomials live on different registries")
            return other._p
        return self.registry.ctx.constant(_to_fmpq(other))

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return MultiPoly(self.registry, self._p + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return MultiPoly(self.registry, self._p - self._lift(other))

    def __rsub__(self, other):
        return MultiPoly(self.registry, self._lift(other) - self._p)

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return MultiPoly(self.registry, self._p * self._lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(self.registry, -self._p)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise AlgebraError("polynomial powers must be non-negative integers")
        return MultiPoly(self.registry, self._p ** k)

    def __truediv__(self, other):
        return RatFunc.from_poly(self) / other

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.registry == other.registry and self._p == other._p
        if isinstance(other, RatFunc):
            return other == self
        try:
            return self._p == self.registry.ctx.constant(_to_fmpq(other))
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(str(self))

    def __str__(self) -> str:
        return _raw_terms_str(self.registry.names, self._p)

    def __repr__(self) -> str:
        return f"MultiPoly({self})"

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def degree(self, var: str) -> int:
        """Degree in ``var``; -1 for the zero polynomial."""
        if self._p.is_zero():
            return -1
        return int(self._p.degrees()[self.registry.index(var)])

    def total_degree(self) -> int:
        return -1 if self._p.is_zero() else self._p.total_degree()

    def depends_on(self, var: str) -> bool:
        return self.degree(var) > 0

    def derivative(self, var: str) -> "MultiPoly":
        return MultiPoly(self.registry, self._p.derivative(self.registry.index(var)))

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self.registry, self._p / self._lift(other))

    def leading_coefficient(self) -> Fraction:
        return fmpq_to_fraction(self._p.leading_coefficient())


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    """Exact add/sub/mul of two polynomials on a shared registry."""
    if a.registry != b.registry:
        raise RegistryMismatch("polynomials live on different registries")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise AlgebraError(f"unknown polynomial operation {op!r}")


def _primitive_scale(raw):
    """Rational s with s*raw integral, primitive, and positive leading coefficient."""
    den_lcm = 1
    num_gcd = 0
    for c in raw.coeffs():
        den_lcm = den_lcm * int(c.q) // math.gcd(den_lcm, int(c.q))
        num_gcd = math.gcd(num_gcd, int(c.p))
    s = flint.fmpq(den_lcm, num_gcd)
    if raw.leading_coefficient() < 0:
        s = -s
    return s


def canonical_poly(raw):
    """Integer content 1 and positive graded-lex leading coefficient."""
    if raw.is_zero():
        return raw
    return raw * _primitive_scale(raw)


def gcd_poly(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Primitive gcd with canonical sign; gcd(a, 0) is the normalized a."""
    if a.registry != b.registry:
        raise RegistryMismatch("polynomials live on different registries")
    g = a._p.gcd(b._p)
    return MultiPoly(a.registry, canonical_poly(g))


# -- RatFunc -------------------------------------------------------------------

def _canon_pair(n, d, ctx):
    if d.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if n.is_zero():
        return n, ctx.constant(1)
    if d.is_constant():
        return n / d.leading_coefficient(), ctx.constant(1)
    if not n.is_constant():
        g = n.gcd(d)
        if not g.is_one():
            n = n / g
            d = d / g
            if d.is_constant():
                return n / d.leading_coefficient(), ctx.constant(1)
    s = _primitive_scale(d)
    if s != 1:
        n = n * s
        d = d * s
    return n, d


class RatFunc:
    """Normalized quotient num/den of polynomials on a registry.

    The denominator is kept primitive over Z with positive graded-lex leading
    coefficient, so equal functions have identical representations.
    """

    __slots__ = ("registry", "_n", "_d", "_str")

    def __init__(self, registry: VarRegistry, n, d=None, _canonical: bool = False):
        self.registry = registry
        if d is None:
            d = registry.ctx.constant(1)
            _canonical = True
        if not _canonical:
            n, d = _canon_pair(n, d, registry.ctx)
        self._n = n
        self._d = d
        self._str = None

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "RatFunc":
        return cls(p.registry, p._p)

    # structure
    @property
    def num(self) -> MultiPoly:
        return MultiPoly(self.registry, self._n)

    @property
    def den(self) -> MultiPoly:
        return MultiPoly(self.registry, self._d)

    def is_zero(self) -> bool:
        return self._n.is_zero()

    def is_one(self) -> bool:
        return self._n.is_one() and self._d.is_one()

    def is_polynomial(self) -> bool:
        return self._d.is_one()

    def is_constant(self) -> bool:
        return self._d.is_one() and self._n.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise AlgebraError(f"{self} is not a constant")
        if self._n.is_zero():
            return Fraction(0)
        return fmpq_to_fraction(self._n.leading_coefficient())

    def degree(self, var: str) -> tuple[int, int]:
        """(degree of numerator, degree of denominator) in ``var``."""
        i = self.registry.index(var)
        dn = -1 if self._n.is_zero() else int(self._n.degrees()[i])
        return dn, int(self._d.degrees()[i])

    def depends_on(self, var: str) -> bool:
        dn, dd = self.degree(var)
        return dn > 0 or dd > 0

    def free_of(self, names: Iterable[str]) -> bool:
        return not any(self.depends_on(v) for v in names)

    # arithmetic
    def _coerce(self, other) -> "RatFunc | None":
        if isinstance(other, RatFunc):
            if other.registry is not self.registry and other.registry != self.registry:
                raise RegistryMismatch("rational functions live on different registries")
            return other
        if isinstance(other, MultiPoly):
            if other.registry != self.registry:
                raise RegistryMismatch("rational functions live on different registries")
            return RatFunc(self.registry, other._p)
        if isinstance(other, (int, Fraction, flint.fmpq, flint.fmpz)):
            return RatFunc(self.registry, self.registry.ctx.constant(_to_fmpq(other)))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o._n.is_zero():
            return self
        if self._n.is_zero():
            return o
        if self._d == o._d:
            return RatFunc(self.registry, self._n + o._n, self._d)
        if self._d.is_one():
            return RatFunc(self.registry, self._n * o._d + o._n, o._d, _canonical=True)
        if o._d.is_one():
            return RatFunc(self.registry, self._n + o._n * self._d, self._d, _canonical=True)
        g = self._d.gcd(o._d)
        if g.is_one():
            return RatFunc(self.registry, self._n * o._d + o._n * self._d, self._d * o._d)
        a = o._d / g
        b = self._d / g
        return RatFunc(self.registry, self._n * a + o._n * b, self._d * a)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.registry, -self._n, self._d, _canonical=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self._n.is_zero() or o._n.is_zero():
            return RatFunc(self.registry, self.registry.ctx.constant(0))
        if o._d.is_one() and o._n.is_constant():
            return RatFunc(self.registry, self._n * o._n.leading_coefficient(), self._d,
                           _canonical=True)
        if self._d.is_one() and self._n.is_constant():
            return RatFunc(self.registry, o._n * self._n.leading_coefficient(), o._d,
                           _canonical=True)
        # cross-cancel before multiplying keeps intermediate sizes down
        n1, d1, n2, d2 = self._n, self._d, o._n, o._d
        if not d2.is_one():
            g = n1.gcd(d2)
            if not g.is_one():
                n1, d2 = n1 / g, d2 / g
        if not d1.is_one():
            g = n2.gcd(d1)
            if not g.is_one():
                n2, d1 = n2 / g, d1 / g
        n = n1 * n2
        d = d1 * d2
        if d.is_constant():
            return RatFunc(self.registry, n / d.leading_coefficient())
        s = _primitive_scale(d)
        return RatFunc(self.registry, n * s, d * s, _canonical=True)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self._n.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        n, d = self._d, self._n
        if d.is_constant():
            return RatFunc(self.registry, n / d.leading_coefficient())
        s = _primitive_scale(d)
        return RatFunc(self.registry, n * s, d * s, _canonical=True)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        try:
            k = operator.index(k)
        except TypeError:
            raise AlgebraError("only integer powers of rational functions are supported") from None
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc(self.registry, self._n ** k, self._d ** k, _canonical=True)

    # comparison / hashing
    def __eq__(self, other) -> bool:
        o = self._coerce(other) if not isinstance(other, RatFunc) else other
        if o is None:
            return NotImplemented
        return self.registry == o.registry and self._n == o._n and self._d == o._d

    def __hash__(self) -> int:
        return hash(str(self))

    def __str__(self) -> str:
        if self._str is None:
            names = self.registry.names
            ns = _raw_terms_str(names, self._n)
            if self._d.is_one():
                self._str = ns
            else:
                ds = _raw_terms_str(names, self._d)
                if len(self._n) > 1:
                    ns = f"({ns})"
                if not _is_plain_monomial(self._d):
                    ds = f"({ds})"
                self._str = f"{ns}/{ds}"
        return self._str

    def __repr__(self) -> str:
        return f"RatFunc({self})"

    # calculus
    def derivative(self, var: str) -> "RatFunc":
        i = self.registry.index(var)
        if self._d.is_one():
            return RatFunc(self.registry, self._n.derivative(i))
        dd = self._d.derivative(i)
        if dd.is_zero():
            return RatFunc(self.registry, self._n.derivative(i), self._d)
        # d(n/d) = (n' d - n d')/d^2; divide out g = gcd(d, d') first
        g = self._d.gcd(dd)
        dg = self._d / g
        num = self._n.derivative(i) * dg - self._n * (dd / g)
        return RatFunc(self.registry, num, self._d * dg)

    def subs(self, bindings: Mapping[str, object]) -> "RatFunc":
        return substitute(self, bindings)


def ratfunc_normalize(num: MultiPoly, den: MultiPoly) -> RatFunc:
    if num.registry != den.registry:
        raise RegistryMismatch("numerator and denominator live on different registries")
    return RatFunc(num.registry, num._p, den._p)


def derivative(f: RatFunc, var: str) -> RatFunc:
    return f.derivative(var)


def as_ratfunc(registry: VarRegistry, value) -> RatFunc:
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, MultiPoly):
        return RatFunc.from_poly(value)
    return registry.const(value)


def _compose_raw(raw, registry: VarRegistry, images: list):
    return raw.compose(*images) if registry.names else raw


def substitute(f, bindings: Mapping[str, object]) -> RatFunc:
    """Simultaneously replace names by rational functions."""
    reg = f.registry
    f = as_ratfunc(reg, f)
    vals = {}
    for name, v in bindings.items():
        reg.index(name)
        vals[name] = as_ratfunc(reg, v)
    if not vals:
        return f
    if all(v.is_polynomial() for v in vals.values()):
        gens = reg.ctx.gens()
        images = [vals[n]._n if n in vals else gens[i] for i, n in enumerate(reg.names)]
        n = f._n.compose(*images) if not f._n.is_constant() else f._n
        d = f._d.compose(*images) if not f._d.is_constant() else f._d
        if d.is_zero():
            raise SubstitutionError(f"denominator of {f} vanishes under substitution")
        return RatFunc(reg, n, d)
    n = _subs_rational(f._n, reg, vals)
    d = _subs_rational(f._d, reg, vals)
    if d.is_zero():
        raise SubstitutionError(f"denominator of {f} vanishes under substitution")
    return n / d


def _subs_rational(raw, reg: VarRegistry, vals: Mapping[str, RatFunc]) -> RatFunc:
    idx = [(reg.index(n), n) for n in vals]
    keep = [i for i in range(len(reg.names)) if reg.names[i] not in vals]
    powers: dict = {}

    def power(name, k):
        key = (name, k)
        if key not in powers:
            powers[key] = vals[name] ** k
        return powers[key]

    total = reg.zero()
    # group terms by the exponents of substituted variables
    groups: dict = {}
    for exps, c in raw.terms():
        key = tuple(int(exps[i]) for i, _ in idx)
        rest = [0] * len(reg.names)
        for i in keep:
            rest[i] = exps[i]
        groups.setdefault(key, {})[tuple(rest)] = c
    for key, data in groups.items():
        term = RatFunc(reg, reg.ctx.from_dict(data))
        for (i, name), k in zip(idx, key):
            if k:
                term = term * power(name, k)
        total = total + term
    return total


def transfer(f, registry: VarRegistry):
    """Re-express a polynomial or rational function on another registry.

    Names are matched by spelling; using a name the target lacks is an error.
    """
    if isinstance(f, RatFunc):
        return RatFunc(registry, transfer(f.num, registry)._p, transfer(f.den, registry)._p)
    src = f.registry
    if src == registry:
        return f
    pos = []
    for i, name in enumerate(src.names):
        pos.append(registry.index(name) if name in registry else None)
    terms = {}
    for e, c in f.terms.items():
        out = [0] * len(registry.names)
        for i, k in enumerate(e):
            if k:
                if pos[i] is None:
                    raise UndeclaredName(f"{src.names[i]!r} is not declared in the target registry")
                out[pos[i]] = k
        terms[tuple(out)] = c
    return MultiPoly.from_terms(registry, terms)
