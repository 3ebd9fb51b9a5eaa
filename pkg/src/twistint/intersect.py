"""Recursive intersection numbers of twisted cocycles.

The variables are integrated out one at a time in a fixed order.  At level i
the forms are expanded in a basis of the cohomology of the first i
variables; the coefficients are rational functions of the next variable and
transform under a connection matrix.  After gauge transformations remove all
higher poles, the last one-variable pairing is a global residue over the
zeros of det(Omega), computed without ever adjoining roots.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (
    RatFunc, UniPoly, adjugate, linear_solve_exact, pole_data, residue_class,
    squarefree_factor,
)
from .algebra.univariate import infinity_order, raw_coefficients
from .cohomology import (
    ROTATION_CANDIDATES, CohomologyBasis, Connection, Twist, check_assumptions,
    critical_quotient, monomial_basis, rotate_coordinates, rotation_bindings, twist_connection,
)
from .algebra import substitute
from .errors import (
    DegenerateFibration, GenericityError, HigherPoleConnection, ReductionLimit, SingularSystem,
    TwistIntError,
)
from .residue import global_residue_of

log = logging.getLogger(__name__)

MAX_REDUCTION_PASSES = 64


# -- data types ----------------------------------------------------------------

@dataclass
class ConnectionMatrix:
    active_var: str
    entries: list
    det: RatFunc = None
    adj: list = None

    def __post_init__(self):
        if self.det is None:
            try:
                self.det, self.adj = adjugate(self.entries)
            except SingularSystem as exc:
                raise GenericityError(
                    f"connection matrix in {self.active_var} is singular") from exc

    @property
    def nu(self) -> int:
        return len(self.entries)

    @property
    def det_num(self):
        return self.det.num

    @property
    def det_den(self):
        return self.det.den

    def transpose(self) -> list:
        return [list(r) for r in zip(*self.entries)]

    def side_matrix(self, side: str) -> list:
        """Omega^T acts on left coefficient vectors, -Omega on right ones."""
        if side == "L":
            return self.transpose()
        if side == "R":
            return [[-x for x in row] for row in self.entries]
        raise ValueError(f"side must be 'L' or 'R', not {side!r}")


@dataclass
class CocycleVec:
    level: int
    side: str
    active_var: str
    coeffs: list

    def __len__(self):
        return len(self.coeffs)

    def with_coeffs(self, coeffs) -> "CocycleVec":
        return CocycleVec(self.level, self.side, self.active_var, list(coeffs))

    def is_simple(self) -> bool:
        return all(pole_data(c, self.active_var).is_simple() for c in self.coeffs)

    def __str__(self):
        return "[" + ", ".join(str(c) for c in self.coeffs) + "]"


@dataclass
class LevelData:
    level: int
    basis: CohomologyBasis
    C: list
    C_inv: list

    @property
    def nu(self) -> int:
        return self.basis.nu


# -- gauge transformations and pole reduction ----------------------------------

def gauge_transform(v: CocycleVec, f: Sequence[RatFunc], omega: ConnectionMatrix,
                    side: str | None = None) -> CocycleVec:
    """v_j -> v_j + d f_j/dz + sum_k M_jk f_k, with M = Omega^T (L) or -Omega (R)."""
    side = side or v.side
    M = omega.side_matrix(side)
    return _gauge(v, f, M)


def _gauge(v: CocycleVec, f, M) -> CocycleVec:
    var = v.active_var
    out = []
    for j, c in enumerate(v.coeffs):
        acc = c + f[j].derivative(var)
        for k, fk in enumerate(f):
            if not fk.is_zero() and not M[j][k].is_zero():
                acc = acc + M[j][k] * fk
        out.append(acc)
    return v.with_coeffs(out)


def _leading(f: RatFunc, var: str):
    """(deg num - deg den, ratio of leading coefficients) in var."""
    reg = f.registry
    i = reg.index(var)
    ncs = raw_coefficients(f._n, i, reg.ctx)
    dcs = raw_coefficients(f._d, i, reg.ctx)
    return len(ncs) - len(dcs), RatFunc(reg, ncs[-1], dcs[-1])


def _residue_at_infinity_matrix(M, var):
    """R = lim z*M(z) for a matrix with at most simple poles at infinity."""
    reg = M[0][0].registry
    R = []
    for row in M:
        out = []
        for x in row:
            if x.is_zero():
                out.append(reg.zero())
                continue
            d, lead = _leading(x, var)
            if d >= 0:
                raise HigherPoleConnection(
                    f"connection entry {x} is not O(1/{var}) at infinity")
            out.append(lead if d == -1 else reg.zero())
        R.append(out)
    return R


def reduce_pole_infinity(v: CocycleVec, omega: ConnectionMatrix, side: str | None = None):
    """One pass lowering the pole order at infinity by one (a no-op if already <= 1)."""
    side = side or v.side
    return _reduce_infinity(v, omega.side_matrix(side))


def _reduce_infinity(v: CocycleVec, M):
    var = v.active_var
    orders = [infinity_order(c, var) for c in v.coeffs]
    o = max((x for x in orders if x is not None), default=None)
    if o is None or o <= 1:
        return v
    reg = v.coeffs[0].registry
    nu = len(v)
    R = _residue_at_infinity_matrix(M, var)
    a = []
    for c, oc in zip(v.coeffs, orders):
        a.append(_leading(c, var)[1] if oc == o else reg.zero())
    A = [[R[j][k] + (reg.const(o - 1) if j == k else reg.zero()) for k in range(nu)]
         for j in range(nu)]
    try:
        c = linear_solve_exact(A, [-x for x in a])
    except SingularSystem as exc:
        raise SingularSystem(
            f"pole at infinity of order {o} cannot be reduced: exponents are non-generic") from exc
    z = reg.var(var)
    f = [cj * z ** (o - 1) for cj in c]
    return _gauge(v, f, M)


def reduce_pole_finite(v: CocycleVec, omega: ConnectionMatrix, q, o: int,
                       side: str | None = None) -> CocycleVec:
    """One pass lowering the pole order along the squarefree factor q from o to o - 1."""
    side = side or v.side
    return _reduce_finite(v, omega.side_matrix(side), q, o)


def _reduce_finite(v: CocycleVec, M, q, o: int) -> CocycleVec:
    if o <= 1:
        return v
    var = v.active_var
    reg = v.coeffs[0].registry
    qr = q if isinstance(q, RatFunc) else RatFunc.from_poly(q)
    qu = UniPoly.from_ratfunc(qr, var)
    m = qu.degree()
    nu = len(v)
    dq = qu.derivative()
    A = [residue_class(c * qr ** o, qu) if not c.is_zero() else UniPoly.zero(reg, var)
         for c in v.coeffs]
    W = [[residue_class(x * qr, qu) if not x.is_zero() else UniPoly.zero(reg, var)
          for x in row] for row in M]
    # unknown (k, t) is the coefficient of z^t in C_k; equation (j, s) is the z^s
    # coefficient of [A_j + sum_k W_jk C_k - (o-1) q' C_j] mod q
    size = nu * m
    mat = [[reg.zero()] * size for _ in range(size)]
    for k in range(nu):
        for t in range(m):
            col = k * m + t
            zt = UniPoly.monomial(reg, var, t)
            for j in range(nu):
                img = (W[j][k] * zt) % qu if not W[j][k].is_zero() else UniPoly.zero(reg, var)
                if j == k:
                    img = img - ((dq * zt) % qu).scale(reg.const(o - 1))
                for s in range(m):
                    mat[j * m + s][col] = img.coeff(s)
    rhs = [-A[j].coeff(s) for j in range(nu) for s in range(m)]
    try:
        sol = linear_solve_exact(mat, rhs)
    except SingularSystem as exc:
        raise SingularSystem(
            f"pole of order {o} along {q} cannot be reduced: exponents are non-generic") from exc
    denom = qr ** (o - 1)
    f = []
    for k in range(nu):
        Ck = UniPoly(reg, var, sol[k * m:(k + 1) * m]).to_ratfunc()
        f.append(Ck / denom)
    return _gauge(v, f, M)


def _lcm_denominator(coeffs):
    den = None
    for c in coeffs:
        if c.is_zero():
            continue
        d = c._d
        if den is None:
            den = d
        elif d != den:
            den = den * (d / den.gcd(d))
    return den


def reduce_to_simple_poles(v: CocycleVec, omega: ConnectionMatrix, side: str | None = None,
                           max_passes: int = MAX_REDUCTION_PASSES):
    """Apply gauge transformations until every coefficient has only simple poles.

    Returns (reduced vector, number of passes).  Infinity is treated first,
    then finite squarefree factors in canonical-string order.
    """
    side = side or v.side
    M = omega.side_matrix(side)
    var = v.active_var
    reg = omega.entries[0][0].registry
    passes = 0
    while True:
        o_inf = max((x for x in (infinity_order(c, var) for c in v.coeffs) if x is not None),
                    default=None)
        step = None
        if o_inf is not None and o_inf > 1:
            step = ("inf", None, o_inf)
        else:
            den = _lcm_denominator(v.coeffs)
            if den is not None and den.degrees()[reg.index(var)] > 0:
                from .algebra import MultiPoly
                facs = squarefree_factor(MultiPoly(reg, den), var)
                high = sorted(((str(q), q, e) for q, e in facs if e > 1), key=lambda t: t[0])
                if high:
                    step = ("fin", high[0][1], high[0][2])
        if step is None:
            return v, passes
        if passes >= max_passes:
            raise ReductionLimit(f"pole reduction in {var} did not terminate "
                                 f"after {max_passes} passes")
        if step[0] == "inf":
            v = _reduce_infinity(v, M)
        else:
            v = _reduce_finite(v, M, step[1], step[2])
        passes += 1


# -- the fibration plan ------------------------------------------------------------

class FibrationPlan:
    """Ordered fibration of the integration variables with per-level bases.

    ``bases`` maps a level (1..n) to a list of basis representatives or a
    ``CohomologyBasis``; ``duals`` maps a level to candidate duals.  Missing
    levels use the standard monomials of the critical ideal.
    """

    def __init__(self, twist: Twist, order: Sequence[str] | None = None,
                 bases: dict | None = None, duals: dict | None = None,
                 check: bool = True):
        reg = twist.registry
        self.twist = twist
        self.registry = reg
        self.order = tuple(order) if order is not None else tuple(reg.z_vars)
        if sorted(self.order) != sorted(reg.z_vars):
            raise ValueError(f"order {self.order} is not a permutation of {reg.z_vars}")
        self.n = len(self.order)
        self.conn: Connection = twist_connection(twist)
        self.check = check
        self._user_bases = dict(bases or {})
        self._user_duals = dict(duals or {})
        self._levels: dict[int, LevelData] = {}
        self._omegas: dict[int, ConnectionMatrix] = {}
        self._memo: dict = {}
        self.reductions = [0] * (self.n + 1)
        self.trace: list[dict] = []
        self.reduced_log: list[dict] = []    # top-level reduced coefficient vectors

    # bases ----------------------------------------------------------------------
    def basis(self, level: int) -> CohomologyBasis:
        reg = self.registry
        if level == 0:
            return CohomologyBasis(0, [reg.one()])
        user = self._user_bases.get(level)
        duals = self._user_duals.get(level)
        if isinstance(user, CohomologyBasis):
            return user
        if user is None:
            elems = monomial_basis(self.conn, level, self.order)
        else:
            elems = list(user)
        return CohomologyBasis(level, elems, list(duals) if duals else [])

    def nu(self, level: int) -> int:
        if level in self._levels:
            return self._levels[level].nu
        if level == 0:
            return 1
        if level in self._user_bases:
            return len(self.basis(level).elements)
        return critical_quotient(self.conn, self.order[:level]).dim

    def level(self, i: int) -> LevelData:
        """Basis, intersection matrix and its inverse at level i."""
        if i in self._levels:
            return self._levels[i]
        reg = self.registry
        b = self.basis(i)
        if i == 0:
            data = LevelData(0, b, [[reg.one()]], [[reg.one()]])
        elif b.nu == 0:
            # vanishing cohomology: every pairing at this level is zero
            data = LevelData(i, b, [], [])
        else:
            C = [[self.pair(i, e, h) for h in b.duals] for e in b.elements]
            try:
                C_inv = linear_solve_exact(C, [[reg.one() if r == c else reg.zero()
                                                for c in range(b.nu)] for r in range(b.nu)])
            except SingularSystem as exc:
                raise GenericityError(
                    f"intersection matrix at level {i} is singular; the basis or the "
                    f"candidate duals are not independent").at_level(i) from exc
            data = LevelData(i, b, C, C_inv)
        self._levels[i] = data
        return data

    def intersection_matrix(self, i: int) -> list:
        return self.level(i).C

    def dual_basis(self, i: int) -> list:
        """d_j = sum_k h_k (C^-1)_kj."""
        data = self.level(i)
        reg = self.registry
        out = []
        for j in range(data.nu):
            acc = reg.zero()
            for k, h in enumerate(data.basis.duals):
                if not data.C_inv[k][j].is_zero():
                    acc = acc + h * data.C_inv[k][j]
            out.append(acc)
        return out

    # connection matrices -----------------------------------------------------------
    def connection_matrix(self, n: int) -> ConnectionMatrix:
        """Omega^(n): how level-(n-1) coefficients transform in the n-th variable."""
        if n in self._omegas:
            return self._omegas[n]
        var = self.order[n - 1]
        prev = self.level(n - 1)
        if prev.nu == 0:
            om = ConnectionMatrix(var, [], self.registry.one(), [])
            self.trace.append({"level": n, "var": var, "nu_prev": 0, "det_num_degree": 0,
                               "det_den_degree": 0, "det": "1"})
            self._omegas[n] = om
            return om
        omega_n = self.conn[var]
        entries = []
        for e in prev.basis.elements:
            shifted = e.derivative(var) + omega_n * e
            row_h = [self.pair(n - 1, shifted, h) for h in prev.basis.duals]
            entries.append(_times_matrix(row_h, prev.C_inv))
        try:
            om = ConnectionMatrix(var, entries)
        except TwistIntError as exc:
            raise exc.at_level(n)
        record = {
            "level": n, "var": var, "nu_prev": prev.nu,
            "det_num_degree": int(om.det_num.degree(var)),
            "det_den_degree": int(om.det_den.degree(var)),
            "det": str(om.det),
        }
        if self.check:
            expected = self.nu(n)
            record["nu"] = expected
            try:
                check_assumptions(om, expected, suggest=lambda: self.suggest_rotation(n))
            except TwistIntError as exc:
                raise exc.at_level(n)
        self.trace.append(record)
        self._omegas[n] = om
        return om

    def connection_matrix_right(self, n: int) -> list:
        """Omega^(n) from the dual side: -<e_j|(d - omega) d_k>, for cross-checks."""
        var = self.order[n - 1]
        prev = self.level(n - 1)
        omega_n = self.conn[var]
        reg = self.registry
        nu = prev.nu
        # <e_j | (d - w) h_m>
        inner = [[self.pair(n - 1, e, h.derivative(var) - omega_n * h)
                  for h in prev.basis.duals] for e in prev.basis.elements]
        dC_inv = [[x.derivative(var) for x in row] for row in prev.C_inv]
        out = []
        for j in range(nu):
            row = []
            for k in range(nu):
                acc = reg.zero()
                for m in range(nu):
                    acc = acc + inner[j][m] * prev.C_inv[m][k] + prev.C[j][m] * dC_inv[m][k]
                row.append(-acc)
            out.append(row)
        return out

    # coefficient vectors -------------------------------------------------------------
    def expand_left(self, phi: RatFunc, n: int) -> CocycleVec:
        prev = self.level(n - 1)
        row = [self.pair(n - 1, phi, h) for h in prev.basis.duals]
        return CocycleVec(n - 1, "L", self.order[n - 1], _times_matrix(row, prev.C_inv))

    def expand_right(self, phi: RatFunc, n: int) -> CocycleVec:
        prev = self.level(n - 1)
        return CocycleVec(n - 1, "R", self.order[n - 1],
                          [self.pair(n - 1, e, phi) for e in prev.basis.elements])

    # pairing -------------------------------------------------------------------------
    def pair(self, level: int, phi_l: RatFunc, phi_r: RatFunc) -> RatFunc:
        """<phi_l | phi_r> integrated over the first ``level`` variables."""
        if level == 0:
            return phi_l * phi_r
        if phi_l.is_zero() or phi_r.is_zero():
            return self.registry.zero()
        key = (level, str(phi_l), str(phi_r))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        try:
            value = self._pair_uncached(level, phi_l, phi_r)
        except TwistIntError as exc:
            raise exc.at_level(level)
        self._memo[key] = value
        return value

    def _pair_uncached(self, n: int, phi_l: RatFunc, phi_r: RatFunc) -> RatFunc:
        om = self.connection_matrix(n)
        if om.nu == 0:
            return self.registry.zero()
        vl = self.expand_left(phi_l, n)
        vr = self.expand_right(phi_r, n)
        if all(c.is_zero() for c in vl.coeffs) or all(c.is_zero() for c in vr.coeffs):
            return self.registry.zero()
        vl, pl = reduce_to_simple_poles(vl, om, "L")
        vr, pr = reduce_to_simple_poles(vr, om, "R")
        self.reductions[n] += pl + pr
        if n == self.n:
            self.reduced_log.append({"left": [str(c) for c in vl.coeffs],
                                     "right": [str(c) for c in vr.coeffs],
                                     "passes": [pl, pr]})
        return final_residue(om, vl, vr)

    def intersection_number(self, phi_l, phi_r) -> RatFunc:
        reg = self.registry
        phi_l = phi_l if isinstance(phi_l, RatFunc) else reg.const(phi_l)
        phi_r = phi_r if isinstance(phi_r, RatFunc) else reg.const(phi_r)
        return self.pair(self.n, phi_l, phi_r)

    def dims(self) -> list:
        return [self.nu(i) for i in range(self.n + 1)]

    # degeneracy repair -------------------------------------------------------------------
    def rotation_pair(self, n: int) -> tuple[str, str]:
        if self.n < 2:
            raise DegenerateFibration("a one-variable fibration cannot be rotated")
        if n >= 2:
            return self.order[n - 2], self.order[n - 1]
        return self.order[0], self.order[1]

    def rotated(self, i: str, j: str, c: int, s: int) -> "FibrationPlan":
        """Same problem after z_i -> c z_i + s z_j, z_j -> -s z_i + c z_j.

        Basis overrides are transported along; the constant Jacobian is
        irrelevant for dual pairings and is not applied to them.
        """
        b = rotation_bindings(self.registry, i, j, c, s)
        tw = rotate_coordinates(self.twist, i, j, c, s)

        def move(d):
            return {lvl: [substitute(x, b) for x in (v.elements if isinstance(v, CohomologyBasis)
                                                     else v)]
                    for lvl, v in d.items()}
        return FibrationPlan(tw, self.order, move(self._user_bases), move(self._user_duals),
                             check=self.check)

    def suggest_rotation(self, n: int) -> str | None:
        try:
            i, j = self.rotation_pair(n)
        except DegenerateFibration:
            return None
        for c, s in ROTATION_CANDIDATES:
            try:
                trial = self.rotated(i, j, c, s)
                for lvl in range(1, n + 1):
                    trial.connection_matrix(lvl)
                return f"rotate {i} {j} {c} {s}"
            except TwistIntError:
                continue
        return None


def _times_matrix(row, M) -> list:
    """row vector times matrix."""
    reg = M[0][0].registry
    out = []
    for j in range(len(M[0])):
        acc = reg.zero()
        for k, x in enumerate(row):
            if not x.is_zero() and not M[k][j].is_zero():
                acc = acc + x * M[k][j]
        out.append(acc)
    return out


def final_residue(om: ConnectionMatrix, vl: CocycleVec, vr: CocycleVec) -> RatFunc:
    """-res_<P>( Q * vl . adj(Omega) . vr ) for simple-pole data."""
    reg = om.entries[0][0].registry
    var = om.active_var
    inner = reg.zero()
    for i, a in enumerate(vl.coeffs):
        if a.is_zero():
            continue
        acc = reg.zero()
        for j, b in enumerate(vr.coeffs):
            if not b.is_zero() and not om.adj[i][j].is_zero():
                acc = acc + om.adj[i][j] * b
        inner = inner + a * acc
    if inner.is_zero():
        return reg.zero()
    P = UniPoly.from_poly(om.det_num, var)
    if P.degree() < 1:
        return reg.zero()
    f = inner * RatFunc.from_poly(om.det_den)
    return -global_residue_of(f, P, var)


def intersection_number(phi_l, phi_r, plan: FibrationPlan) -> RatFunc:
    return plan.intersection_number(phi_l, phi_r)


def intersection_matrix(plan: FibrationPlan, i: int) -> list:
    return plan.intersection_matrix(i)


def dual_basis(plan: FibrationPlan, i: int) -> list:
    return plan.dual_basis(i)


def connection_matrix(plan: FibrationPlan, n: int) -> ConnectionMatrix:
    return plan.connection_matrix(n)


def expand_left(phi, plan: FibrationPlan, n: int | None = None) -> CocycleVec:
    return plan.expand_left(phi, plan.n if n is None else n)


def expand_right(phi, plan: FibrationPlan, n: int | None = None) -> CocycleVec:
    return plan.expand_right(phi, plan.n if n is None else n)
