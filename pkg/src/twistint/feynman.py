"""Baikov representation of Feynman integrals and maximal-cut intersection numbers.

Momenta are abstract labels.  Scalar products between external momenta come
from a user table; scalar products involving loop momenta are traded for the
Baikov variables z_s = -q_s^2 + m_s^2, which are linear in them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .algebra import (
    MultiPoly, RatFunc, VarRegistry, determinant, linear_solve_exact, substitute, transfer,
)
from .cohomology import CohomologyBasis, Twist
from .errors import AlgebraError, NonGenericExponent, SingularCMatrix, SingularSystem
from .intersect import FibrationPlan
from .parsing import parse_ratfunc


def _pair(a: str, b: str) -> tuple:
    return (a, b) if a <= b else (b, a)


@dataclass
class BaikovSetup:
    """Loop/external momenta, the external dot table and the propagator definitions.

    ``props`` maps each Baikov variable to its expression in scalar products
    (written ``k1.k2``, ``k1.p``, ...) and parameters.
    """
    loops: list
    externals: list
    dots: dict                       # (ext, ext) -> RatFunc on ``registry``
    props: dict                      # z name -> RatFunc on the scalar-product registry
    registry: VarRegistry            # z_vars = props, params = kinematics and exponents
    sp_registry: VarRegistry         # loop scalar products as variables
    sigma: list                      # loop scalar-product pairs, in sigma order
    prefactor: dict = field(default_factory=dict)   # param -> exponent of (-param)

    @property
    def n(self) -> int:
        l, e = len(self.loops), len(self.externals)
        return l * (l + 1) // 2 + e * l

    @classmethod
    def build(cls, loops: Sequence[str], externals: Sequence[str], params: Sequence[str],
              dots: Mapping, props: Sequence[tuple], prefactor: Mapping | None = None,
              locations: Mapping | None = None) -> "BaikovSetup":
        """Parse dot-table values and propagator expressions given as strings or RatFuncs.

        ``locations`` optionally maps a propagator name or a dot pair to the
        (line, column offset) of its text, for diagnostics.
        """
        where = locations or {}
        loops, externals = list(loops), list(externals)
        zs = [name for name, _ in props]
        reg = VarRegistry(zs, params)
        sigma = [(loops[i], loops[j]) for i in range(len(loops)) for j in range(i, len(loops))]
        sigma += [(k, p) for k in loops for p in externals]
        sp_names = [f"sp{t}" for t in range(len(sigma))]
        sp_reg = VarRegistry(sp_names, params)
        table = {}
        for (a, b), v in dots.items():
            if a in loops or b in loops:
                raise AlgebraError(f"dot {a}.{b} involves a loop momentum; only external "
                                   "products are tabulated")
            table[_pair(a, b)] = (v if isinstance(v, RatFunc)
                                  else parse_ratfunc(str(v), reg, None, *where.get((a, b), (None, 0))))
        for i, a in enumerate(externals):
            for b in externals[i:]:
                if _pair(a, b) not in table:
                    raise AlgebraError(f"missing dot product {a}.{b}")
        extra = {}
        for t, (a, b) in enumerate(sigma):
            extra[f"{a}.{b}"] = extra[f"{b}.{a}"] = sp_reg.var(sp_names[t])
        for (a, b), v in table.items():
            extra[f"{a}.{b}"] = extra[f"{b}.{a}"] = transfer(v, sp_reg)
        parsed = {}
        for name, expr in props:
            parsed[name] = (expr if isinstance(expr, RatFunc)
                            else parse_ratfunc(str(expr), sp_reg, extra, *where.get(name, (None, 0))))
        setup = cls(loops, externals, table, parsed, reg, sp_reg, sigma, dict(prefactor or {}))
        if len(zs) != setup.n:
            raise AlgebraError(f"{len(zs)} propagators given, but l(l+1)/2 + e*l = {setup.n}")
        return setup

    def linear_data(self):
        """(C, f) with z_s = sum_t C_st sigma_t + f_s and sigma_t = -(scalar product)."""
        sp = self.sp_registry
        zero = {name: sp.zero() for name in sp.z_vars}
        C, f = [], []
        for name in self.registry.z_vars:
            e = self.props[name]
            if not e.is_polynomial():
                raise AlgebraError(f"propagator {name} is not polynomial in the scalar products")
            f_s = substitute(e, zero)
            row = []
            for v in sp.z_vars:
                d = e.derivative(v)
                if any(d.depends_on(w) for w in sp.z_vars):
                    raise AlgebraError(f"propagator {name} is not linear in the scalar products")
                row.append(transfer(-d, self.registry))
            C.append(row)
            f.append(transfer(f_s, self.registry))
        return C, f

    def sigma_in_z(self) -> list:
        """sigma_t = (C^-1)_ts (z_s - f_s) on the Baikov registry."""
        C, f = self.linear_data()
        reg = self.registry
        rhs = [reg.var(z) - fs for z, fs in zip(reg.z_vars, f)]
        try:
            return linear_solve_exact(C, rhs)
        except SingularSystem as exc:
            raise SingularCMatrix("the propagators do not determine all loop scalar products") from exc

    def dot(self, a: str, b: str, sigma_vals=None) -> RatFunc:
        key = _pair(a, b)
        if a in self.loops or b in self.loops:
            sigma_vals = sigma_vals if sigma_vals is not None else self.sigma_in_z()
            for t, pr in enumerate(self.sigma):
                if _pair(*pr) == key:
                    return -sigma_vals[t]
            raise AlgebraError(f"no scalar product {a}.{b}")
        return self.dots[key]


def gram_determinant(vectors: Sequence[str], dot) -> RatFunc:
    """det(-q_i . q_j) for a callable dot(a, b)."""
    m = [[-dot(a, b) for b in vectors] for a in vectors]
    return determinant(m)


def baikov_polynomial(setup: BaikovSetup) -> MultiPoly:
    sig = setup.sigma_in_z()
    vecs = list(setup.loops) + list(setup.externals)
    B = gram_determinant(vecs, lambda a, b: setup.dot(a, b, sig))
    if not B.is_polynomial():
        raise AlgebraError("Baikov polynomial is not polynomial")
    return B.num


def cut_registry(setup: BaikovSetup, cut: Sequence[str]) -> VarRegistry:
    keep = [z for z in setup.registry.z_vars if z not in set(cut)]
    return VarRegistry(keep, setup.registry.params)


def on_cut(f, setup: BaikovSetup, cut: Sequence[str], target: VarRegistry | None = None) -> RatFunc:
    """Set the cut variables to zero and move the result to the cut registry."""
    reg = setup.registry
    target = target or cut_registry(setup, cut)
    f = f if isinstance(f, RatFunc) else RatFunc.from_poly(f)
    return transfer(substitute(f, {z: reg.zero() for z in cut}), target)


def maximal_cut_twist(B_cut, exponent) -> Twist:
    """u = B_cut^exponent; an integer exponent is rejected as non-generic."""
    p = B_cut.num if isinstance(B_cut, RatFunc) else B_cut
    if p.is_zero():
        raise AlgebraError("the cut Baikov polynomial vanishes")
    reg = p.registry
    exponent = exponent if isinstance(exponent, RatFunc) else reg.const(exponent)
    if exponent.is_zero():
        raise NonGenericExponent("twist exponent 0 is not generic")
    return Twist(reg, ((p, exponent),))


def raised_propagator_form(B: MultiPoly, exponent: RatFunc, base: RatFunc, var: str) -> RatFunc:
    """B^(-a) d/d(var) (B^a base) = d base/d var + a (dB/d var / B) base.

    With base = 1/B and a = -eps this is the dotted-propagator integrand
    -(1+eps) (dB/dz) / B^2 before cutting.
    """
    Bf = RatFunc.from_poly(B)
    return base.derivative(var) + exponent * Bf.derivative(var) / Bf * base


def derivative_basis(B: MultiPoly, exponent: RatFunc, setup: BaikovSetup, cut: Sequence[str],
                     target: VarRegistry | None = None) -> list:
    """1/B followed by B^(-a) d/dz_s B^(a-1) for every cut variable z_s, all on the cut."""
    target = target or cut_registry(setup, cut)
    base = setup.registry.one() / RatFunc.from_poly(B)
    out = [on_cut(base, setup, cut, target)]
    for z in cut:
        out.append(on_cut(raised_propagator_form(B, exponent, base, z), setup, cut, target))
    return out


def prefactor_shift(prefactor: Mapping, var: str, registry: VarRegistry) -> RatFunc:
    """d/d var of ln prod (-param)^exponent."""
    if var not in prefactor:
        return registry.zero()
    e = prefactor[var]
    e = e if isinstance(e, RatFunc) else parse_ratfunc(str(e), registry)
    return transfer(e, registry) / registry.var(var)


def de_matrix_entries(plan: FibrationPlan, basis_elem: RatFunc, kin_var: str,
                      shift: RatFunc | None = None) -> list:
    """Row of the differential-equation matrix for d/d kin_var of one basis element.

    phi_L = d e/dx + omega_x e + shift * e, paired with the top-level dual basis.
    """
    reg = plan.registry
    shift = shift if shift is not None else reg.zero()
    w = plan.twist.log_derivative(kin_var)
    phi = basis_elem.derivative(kin_var) + w * basis_elem + shift * basis_elem
    return project_on_duals(plan, phi)


def project_on_duals(plan: FibrationPlan, phi: RatFunc) -> list:
    """Coefficients <phi|d_j> on the top-level dual basis."""
    top = plan.level(plan.n)
    row = [plan.pair(plan.n, phi, h) for h in top.basis.duals]
    out = []
    for j in range(top.nu):
        acc = plan.registry.zero()
        for k, x in enumerate(row):
            if not x.is_zero() and not top.C_inv[k][j].is_zero():
                acc = acc + x * top.C_inv[k][j]
        out.append(acc)
    return out


def de_matrix(plan: FibrationPlan, kin_var: str, shift: RatFunc | None = None) -> list:
    top = plan.level(plan.n)
    return [de_matrix_entries(plan, e, kin_var, shift) for e in top.basis.elements]


def reduction_coefficient(target: RatFunc, master, plan: FibrationPlan) -> RatFunc:
    """Coefficient of a master integral in the cut integrand ``target``: <target|d_master>.

    ``master`` is an index into the top-level basis or one of its elements.
    """
    top = plan.level(plan.n)
    if isinstance(master, int):
        idx = master
    else:
        try:
            idx = top.basis.elements.index(master)
        except ValueError:
            raise AlgebraError(f"{master} is not a top-level basis element") from None
    return project_on_duals(plan, target)[idx]


def numeric_de_matrix(plan: FibrationPlan, kin_var: str, sample, shift: RatFunc | None = None,
                      n_points: int = 64):
    """A_x at a numeric sample from numeric pairings only."""
    from .oracle import numeric_projection

    return numeric_projection(plan, de_forms(plan, kin_var, shift), sample,
                              n_points).astype(complex)


def de_forms(plan: FibrationPlan, kin_var: str, shift: RatFunc | None = None) -> list:
    """d_x e_j + omega_x e_j + shift e_j for every top-level basis element."""
    reg = plan.registry
    shift = shift if shift is not None else reg.zero()
    w = plan.twist.log_derivative(kin_var)
    return [e.derivative(kin_var) + w * e + shift * e for e in plan.level(plan.n).basis.elements]


def flatness_defect(A_x: list, A_y: list, x: str, y: str) -> list:
    """d_y A_x - d_x A_y + [A_x, A_y]; zero for an integrable system."""
    n = len(A_x)
    reg = A_x[0][0].registry
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            v = A_x[i][j].derivative(y) - A_y[i][j].derivative(x)
            for k in range(n):
                v = v + A_x[i][k] * A_y[k][j] - A_y[i][k] * A_x[k][j]
            row.append(v)
        out.append(row)
    return out


def dual_element(plan: FibrationPlan, j: int) -> RatFunc:
    """Top-level dual basis element d_j = sum_k h_k (C^-1)_kj."""
    return plan.dual_basis(plan.n)[j]
