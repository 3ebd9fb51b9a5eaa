"""Twists, their logarithmic connection, and bases of the twisted cohomology.

Dimensions are counted as the number of proper critical points of the
restricted connection: the zeros of the numerators of omega_j that do not lie
on the hypersurface of the twist.  Monomial bases come from a Groebner basis
of the critical ideal in graded reverse-lex order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import (
    MultiPoly, RatFunc, VarRegistry, determinant, matmul, nullspace, rank, substitute,
)
from .algebra.poly import canonical_poly
from .algebra.univariate import primitive_split, raw_coefficients
from .errors import (
    AlgebraError, DegenerateFibration, HigherPoleConnection, NonGenericExponent,
    NotZeroDimensional,
)

# rotations tried, in order, when a fibration is degenerate
ROTATION_CANDIDATES = ((1, 2), (1, 3), (1, 5))


# -- twist and connection --------------------------------------------------------

def _check_exponent(reg: VarRegistry, gamma: RatFunc) -> None:
    if not gamma.free_of(reg.z_vars):
        raise AlgebraError(f"exponent {gamma} depends on an integration variable")
    if not gamma.is_polynomial() or gamma.num.total_degree() > 1:
        raise AlgebraError(f"exponent {gamma} is not affine in the parameters")
    if gamma.is_constant() and gamma.constant_value().denominator == 1:
        raise NonGenericExponent(
            f"exponent {gamma} is an integer; twist exponents must be generic")


@dataclass(frozen=True)
class Twist:
    """u = prod p_i^gamma_i with polynomial p_i and affine symbolic gamma_i."""

    registry: VarRegistry
    factors: tuple  # of (MultiPoly, RatFunc)

    def __post_init__(self):
        fs = []
        for p, g in self.factors:
            if isinstance(p, RatFunc):
                if not p.is_polynomial():
                    raise AlgebraError(f"twist factor {p} is not a polynomial")
                p = p.num
            if p.is_zero():
                raise AlgebraError("twist factor is zero")
            g = g if isinstance(g, RatFunc) else self.registry.const(g)
            _check_exponent(self.registry, g)
            fs.append((p, g))
        object.__setattr__(self, "factors", tuple(fs))

    def log_derivative(self, var: str) -> RatFunc:
        """d ln u / d var; also valid for parameters (used for kinematic derivatives)."""
        total = self.registry.zero()
        for p, g in self.factors:
            dp = p.derivative(var)
            if not dp.is_zero():
                total = total + g * RatFunc.from_poly(dp) / RatFunc.from_poly(p)
        return total

    def negated(self) -> "Twist":
        return Twist(self.registry, tuple((p, -g) for p, g in self.factors))

    def substitute(self, bindings: Mapping[str, RatFunc]) -> "Twist":
        out = []
        for p, g in self.factors:
            q = substitute(RatFunc.from_poly(p), bindings)
            if not q.is_polynomial():
                raise AlgebraError("substitution turned a twist factor into a fraction")
            out.append((q.num, substitute(g, bindings)))
        return Twist(self.registry, tuple(out))

    def singular_factors(self, names: Iterable[str]) -> list:
        names = list(names)
        return [p for p, _ in self.factors if any(p.depends_on(v) for v in names)]

    def __str__(self) -> str:
        return "*".join(f"({p})^({g})" for p, g in self.factors)


@dataclass(frozen=True)
class Connection:
    """omega_j = d ln u / d z_j for every integration variable."""

    twist: Twist
    components: Mapping[str, RatFunc]

    def __getitem__(self, var: str) -> RatFunc:
        return self.components[var]

    def level(self, order: Sequence[str], i: int) -> dict:
        return {v: self.components[v] for v in order[:i]}


def twist_connection(t: Twist) -> Connection:
    return Connection(t, {v: t.log_derivative(v) for v in t.registry.z_vars})


def rotation_bindings(reg: VarRegistry, i: str, j: str, c, s) -> dict:
    zi, zj = reg.var(i), reg.var(j)
    return {i: zi * c + zj * s, j: zi * (-s) + zj * c}


def inverse_rotation_bindings(reg: VarRegistry, i: str, j: str, c, s) -> dict:
    n = Fraction(c) ** 2 + Fraction(s) ** 2
    zi, zj = reg.var(i), reg.var(j)
    return {i: (zi * c - zj * s) / reg.const(n), j: (zi * s + zj * c) / reg.const(n)}


def rotate_coordinates(t: Twist, i: str, j: str, c: int, s: int) -> Twist:
    """Substitute z_i -> c z_i + s z_j and z_j -> -s z_i + c z_j in every factor."""
    if c == 0 and s == 0:
        raise AlgebraError("rotation with c = s = 0 is not invertible")
    return t.substitute(rotation_bindings(t.registry, i, j, c, s))


# -- Groebner bases with function-field coefficients -------------------------------

def grevlex_key(exp: tuple) -> tuple:
    return (sum(exp), tuple(-e for e in reversed(exp)))


class FiberPoly:
    """Sparse polynomial in the fiber variables with RatFunc coefficients."""

    __slots__ = ("vars", "terms", "_lm")

    def __init__(self, fvars: tuple, terms: dict):
        self.vars = fvars
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}
        self._lm = max(self.terms, key=grevlex_key) if self.terms else None

    @classmethod
    def from_ratfunc(cls, f: RatFunc, fvars: Sequence[str]) -> "FiberPoly":
        reg = f.registry
        fvars = tuple(fvars)
        idx = [reg.index(v) for v in fvars]
        if any(f._d.degrees()[i] > 0 for i in idx):
            raise AlgebraError(f"{f} is not polynomial in {fvars}")
        buckets: dict = {}
        for exps, c in f._n.terms():
            key = tuple(int(exps[i]) for i in idx)
            e = list(exps)
            for i in idx:
                e[i] = 0
            buckets.setdefault(key, {})[tuple(e)] = c
        terms = {k: RatFunc(reg, reg.ctx.from_dict(d), f._d) for k, d in buckets.items()}
        return cls(fvars, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def lm(self) -> tuple:
        return self._lm

    def lc(self) -> RatFunc:
        return self.terms[self._lm]

    def monic(self) -> "FiberPoly":
        inv = self.lc().inverse()
        return FiberPoly(self.vars, {k: v * inv for k, v in self.terms.items()})

    def sub_shifted(self, c: RatFunc, shift: tuple, g: "FiberPoly") -> "FiberPoly":
        """self - c * x^shift * g"""
        out = dict(self.terms)
        for k, v in g.terms.items():
            kk = tuple(a + b for a, b in zip(k, shift))
            out[kk] = out[kk] - c * v if kk in out else -(c * v)
        return FiberPoly(self.vars, out)

    def mul_monomial(self, shift: tuple) -> "FiberPoly":
        return FiberPoly(self.vars, {tuple(a + b for a, b in zip(k, shift)): v
                                     for k, v in self.terms.items()})

    def to_ratfunc(self, reg: VarRegistry) -> RatFunc:
        total = reg.zero()
        for k, v in self.terms.items():
            m = reg.one()
            for name, e in zip(self.vars, k):
                if e:
                    m = m * reg.var(name) ** e
            total = total + v * m
        return total

    def __str__(self):
        return " + ".join(f"({v})*{k}" for k, v in sorted(self.terms.items(),
                                                          key=lambda t: grevlex_key(t[0]),
                                                          reverse=True))


def _divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _reduce(f: FiberPoly, G: list) -> FiberPoly:
    """Fully reduced normal form of f modulo G (G monic)."""
    rem = {}
    p = f
    while not p.is_zero():
        lm = p.lm()
        for g in G:
            glm = g.lm()
            if _divides(glm, lm):
                shift = tuple(a - b for a, b in zip(lm, glm))
                p = p.sub_shifted(p.lc(), shift, g)
                break
        else:
            rem[lm] = p.lc()
            rest = dict(p.terms)
            del rest[lm]
            p = FiberPoly(p.vars, rest)
    return FiberPoly(f.vars, rem)


def _spoly(f: FiberPoly, g: FiberPoly) -> FiberPoly:
    l = tuple(max(a, b) for a, b in zip(f.lm(), g.lm()))
    sf = tuple(a - b for a, b in zip(l, f.lm()))
    sg = tuple(a - b for a, b in zip(l, g.lm()))
    return f.mul_monomial(sf).sub_shifted(f.lc() / g.lc(), sg, g)


def buchberger(generators: Sequence, fiber_vars: Sequence[str]) -> list:
    """Reduced Groebner basis (monic, grevlex with the first fiber variable largest)."""
    fvars = tuple(fiber_vars)
    G = []
    for g in generators:
        fp = g if isinstance(g, FiberPoly) else FiberPoly.from_ratfunc(
            g if isinstance(g, RatFunc) else RatFunc.from_poly(g), fvars)
        if not fp.is_zero():
            G.append(fp.monic())
    if not G:
        return []
    pairs = [(i, j) for j in range(len(G)) for i in range(j)]
    while pairs:
        pairs.sort(key=lambda ij: grevlex_key(tuple(max(a, b) for a, b in
                                                     zip(G[ij[0]].lm(), G[ij[1]].lm()))))
        i, j = pairs.pop(0)
        a, b = G[i].lm(), G[j].lm()
        if all(x == 0 or y == 0 for x, y in zip(a, b)):
            continue  # coprime leading monomials
        r = _reduce(_spoly(G[i], G[j]), G)
        if not r.is_zero():
            G.append(r.monic())
            k = len(G) - 1
            pairs.extend((t, k) for t in range(k))
    # minimize and interreduce
    G.sort(key=lambda g: grevlex_key(g.lm()))
    minimal = []
    for g in G:
        if not any(_divides(h.lm(), g.lm()) for h in minimal):
            minimal.append(g)
    reduced = []
    for idx, g in enumerate(minimal):
        others = minimal[:idx] + minimal[idx + 1:]
        reduced.append(_reduce(g, others).monic())
    reduced.sort(key=lambda g: grevlex_key(g.lm()))
    return reduced


def standard_monomials(GB: Sequence[FiberPoly], fiber_vars: Sequence[str]) -> list:
    """Monomials (exponent tuples) not divisible by any leading monomial, ascending."""
    n = len(fiber_vars)
    lms = [g.lm() for g in GB]
    if any(sum(m) == 0 for m in lms):
        return []
    bounds = []
    for v in range(n):
        pure = [m[v] for m in lms if all(m[w] == 0 for w in range(n) if w != v)]
        if not pure:
            raise NotZeroDimensional(
                f"critical ideal is not zero-dimensional (no pure power of {fiber_vars[v]})")
        bounds.append(min(pure))
    out = []

    def rec(prefix):
        if len(prefix) == n:
            m = tuple(prefix)
            if not any(_divides(l, m) for l in lms):
                out.append(m)
            return
        for e in range(bounds[len(prefix)]):
            rec(prefix + [e])

    rec([])
    out.sort(key=grevlex_key)
    return out


def monomial_ratfunc(reg: VarRegistry, fiber_vars: Sequence[str], exp: tuple) -> RatFunc:
    m = reg.one()
    for name, e in zip(fiber_vars, exp):
        if e:
            m = m * reg.var(name) ** e
    return m


# -- critical points ---------------------------------------------------------------

@dataclass
class CriticalQuotient:
    fiber_vars: tuple
    groebner: list
    standard: list          # standard monomials of the critical ideal
    proper_basis: list      # subset spanning the quotient after removing improper points
    dim: int


def _remove_common_roots(P, h, i):
    """Divide out of P (in variable i) every root it shares with h."""
    while True:
        g = P.gcd(h)
        if g.degrees()[i] == 0:
            return P
        P = P / g


def _critical_numerators(conn: Connection, fiber_vars: Sequence[str]) -> list:
    return [conn[v].num for v in fiber_vars]


def critical_quotient(conn: Connection, fiber_vars: Sequence[str]) -> CriticalQuotient:
    reg = conn.twist.registry
    fvars = tuple(fiber_vars)
    singular = conn.twist.singular_factors(fvars)
    nums = _critical_numerators(conn, fvars)
    if len(fvars) == 1:
        i = reg.index(fvars[0])
        P = nums[0]._p
        if P.is_zero() or P.degrees()[i] == 0:
            if P.is_zero():
                raise NotZeroDimensional("connection vanishes identically")
            dim = 0
        else:
            _, P = primitive_split(P, i, reg.ctx)
            for h in singular:
                P = _remove_common_roots(P, h._p, i)
            dim = int(P.degrees()[i])
        gb = buchberger([MultiPoly(reg, canonical_poly(nums[0]._p))], fvars)
        std = standard_monomials(gb, fvars)
        basis = [(k,) for k in range(dim)]
        return CriticalQuotient(fvars, gb, std, basis, dim)
    gb = buchberger(nums, fvars)
    std = standard_monomials(gb, fvars)
    N = len(std)
    if N == 0:
        return CriticalQuotient(fvars, gb, std, [], 0)
    # Points of the quotient lying on a twist factor are improper.  They span
    # the generalized kernel of multiplication by that factor.
    improper = []
    for h in singular:
        M = multiplication_matrix(RatFunc.from_poly(h), gb, std, fvars)
        if not determinant(M).is_zero():
            continue
        power, r_prev = M, rank(M)
        while True:
            nxt = matmul(power, M)
            r = rank(nxt)
            if r == r_prev:
                break
            power, r_prev = nxt, r
        improper.extend(nullspace(power))
    if not improper:
        return CriticalQuotient(fvars, gb, std, list(std), N)
    base = rank([list(r) for r in zip(*improper)])
    chosen, cols = [], list(improper)
    for idx, m in enumerate(std):
        unit = [reg.one() if k == idx else reg.zero() for k in range(N)]
        trial = cols + [unit]
        if rank([list(r) for r in zip(*trial)]) == base + len(chosen) + 1:
            cols.append(unit)
            chosen.append(m)
    return CriticalQuotient(fvars, gb, std, chosen, len(chosen))


def multiplication_matrix(h: RatFunc, gb, std, fvars) -> list:
    """Matrix of multiplication by h on K[z]/I in the standard monomial basis.

    Column k holds the coordinates of h * std[k].
    """
    reg = h.registry
    index = {m: k for k, m in enumerate(std)}
    hp = FiberPoly.from_ratfunc(h, fvars)
    N = len(std)
    M = [[reg.zero() for _ in range(N)] for _ in range(N)]
    for k, m in enumerate(std):
        nf = _reduce(hp.mul_monomial(m), gb)
        for mono, c in nf.terms.items():
            M[index[mono]][k] = c
    return M


def cohomology_dim(conn: Connection, level: int, order: Sequence[str] | None = None) -> int:
    order = list(order) if order is not None else list(conn.twist.registry.z_vars)
    if level == 0:
        return 1
    return critical_quotient(conn, order[:level]).dim


def monomial_basis(conn: Connection, level: int, order: Sequence[str]) -> list:
    if level == 0:
        return [conn.twist.registry.one()]
    cq = critical_quotient(conn, list(order)[:level])
    reg = conn.twist.registry
    return [monomial_ratfunc(reg, cq.fiber_vars, m) for m in cq.proper_basis]


@dataclass
class CohomologyBasis:
    level: int
    elements: list
    duals: list = field(default_factory=list)

    def __post_init__(self):
        if not self.duals:
            self.duals = list(self.elements)
        if len(self.duals) != len(self.elements):
            raise AlgebraError(
                f"level {self.level}: {len(self.elements)} basis elements but "
                f"{len(self.duals)} candidate duals")

    @property
    def nu(self) -> int:
        return len(self.elements)


# -- assumption checks -------------------------------------------------------------

@dataclass
class AssumptionReport:
    active_var: str
    simple_poles: list          # nu x nu booleans
    det_degree: int
    expected: int

    @property
    def simple(self) -> bool:
        return all(all(row) for row in self.simple_poles)

    @property
    def degree_ok(self) -> bool:
        return self.det_degree == self.expected

    @property
    def passed(self) -> bool:
        return self.simple and self.degree_ok


def check_assumptions(omega, nu_expected: int, *, raise_on_failure: bool = True,
                      suggest: Callable[[], str | None] | None = None) -> AssumptionReport:
    """Validate simple poles of every entry and the critical-point count of det Omega."""
    from .algebra import pole_data
    var = omega.active_var
    flags = [[pole_data(x, var).is_simple() for x in row] for row in omega.entries]
    deg = omega.det_num.degree(var)
    report = AssumptionReport(var, flags, deg, nu_expected)
    if raise_on_failure:
        if not report.simple:
            bad = [(i, j) for i, row in enumerate(flags) for j, ok in enumerate(row) if not ok]
            raise HigherPoleConnection(
                f"connection matrix in {var} has higher poles in entries {bad}")
        if not report.degree_ok:
            hint = suggest() if suggest is not None else None
            msg = (f"det of the connection matrix in {var} has {deg} critical points, "
                   f"expected {nu_expected}")
            if hint:
                msg += f"; try `{hint}`"
            raise DegenerateFibration(msg, suggestion=hint, found=deg, expected=nu_expected)
    return report
