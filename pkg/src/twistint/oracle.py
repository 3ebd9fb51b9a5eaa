"""Floating-point cross-checks of exact intersection numbers.

Two independent numeric routes are provided.

* Critical-point sum: for simple-pole data the univariate pairing is
  -sum over the zeros r of P of Q(r) vL(r) adj(r) vR(r) / P'(r).
* Local solutions: around every singular point (infinity included, in the
  coordinate w = 1/z) the equation psi' + Omega^T psi = vL is solved as a
  Laurent series whose coefficients come from FFTs on small circles; the
  pairing is the sum of the residues of psi . vR.  This route accepts data
  with higher poles, so it also validates the pole reduction, and it is run
  recursively through every level of the fibration.

The exact machinery is used only to locate singular points (denominators of
the connection matrices and of the coefficient vectors at the sample).
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import MultiPoly, RatFunc, substitute, squarefree_factor
from .cohomology import CohomologyBasis, Twist
from .errors import (
    NonGenericExponent, OracleError, ResonantSample, RootClustering, ToleranceExceeded,
    TwistIntError,
)
from .intersect import CocycleVec, ConnectionMatrix, FibrationPlan

# extended precision (64-bit mantissa on x86) for everything after root finding
CT = np.clongdouble
RT = np.longdouble
PI = 4 * np.arctan(RT(1))
CLUSTER_TOL = 1e-6
RESONANCE_TOL = 1e-7
MAX_RETRIES = 5
RESONANCE_RCOND = 1e-9


@dataclass
class NumericSample:
    bindings: dict            # param name -> Fraction
    seed: int = 0
    tolerance: float = 1e-8

    def exact(self, registry) -> dict:
        return {k: registry.const(v) for k, v in self.bindings.items()}

    def __str__(self):
        return ", ".join(f"{k}={v}" for k, v in self.bindings.items())


def _rand_fraction(rng: random.Random) -> Fraction:
    while True:
        den = rng.randint(2, 23)
        num = rng.randint(-60, 60)
        f = Fraction(num, den)
        if f != 0 and f.denominator != 1:
            return f


def random_sample(params: Sequence[str], seed: int, twist: Twist | None = None,
                  tolerance: float = 1e-8) -> NumericSample:
    """Random non-integer rationals for every parameter, keeping exponents generic."""
    rng = random.Random(seed)
    for _ in range(1000):
        b = {p: _rand_fraction(rng) for p in params}
        if twist is not None and not _exponents_generic(twist, b):
            continue
        return NumericSample(b, seed, tolerance)
    raise OracleError("could not draw a generic parameter sample")


def _exponents_generic(twist: Twist, bindings: dict) -> bool:
    """Exponents and their degree-weighted sums must stay non-integer.

    Local exponents at infinity and where divisors meet are such sums, so an
    integer there means logarithmic local solutions.  Sums that are integers
    for every parameter value are structural and left to the local solver.
    """
    reg = twist.registry
    ex = {k: reg.const(v) for k, v in bindings.items()}
    exps, vals, degs = [], [], []
    for p, g in twist.factors:
        v = substitute(g, ex)
        if not v.is_constant():
            return False
        c = v.constant_value()
        if c.denominator == 1:
            return False
        exps.append(g)
        vals.append(c)
        degs.append(max(1, p.total_degree()))
    if math.prod(d + 1 for d in degs) > 4096:
        degs = [1] * len(degs)
    for mult in itertools.product(*(range(d + 1) for d in degs)):
        if not any(mult):
            continue
        if sum((m * c for m, c in zip(mult, vals)), Fraction(0)).denominator != 1:
            continue
        combo = reg.zero()
        for m, g in zip(mult, exps):
            combo = combo + g * m
        if not combo.is_constant():
            return False
    return True


def evaluate_exact(f: RatFunc, sample: NumericSample) -> complex:
    """Value of a parameter-only rational function at the sample."""
    v = substitute(f, sample.exact(f.registry))
    if not v.is_constant():
        raise OracleError(f"{f} still depends on integration variables")
    return complex(float(v.constant_value()))


# -- numeric polynomials ---------------------------------------------------------

class _NumPoly:
    """A polynomial in the integration variables with numeric coefficients."""

    __slots__ = ("exps", "coeffs", "zidx")

    def __init__(self, p: MultiPoly, zvars: Sequence[str]):
        reg = p.registry
        zidx = [reg.index(v) for v in zvars]
        exps, cs = [], []
        for e, c in p.terms.items():
            if any(e[i] for i in range(len(e)) if i not in zidx):
                raise OracleError(f"{p} still depends on parameters")
            exps.append([e[i] for i in zidx])
            cs.append(RT(str(c.numerator)) / RT(str(c.denominator)))
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), len(zidx))
        self.coeffs = np.array(cs, dtype=CT)
        self.zidx = zidx

    def univariate(self, k: int, point: np.ndarray) -> np.ndarray:
        """Ascending coefficients in variable k with the others fixed at ``point``."""
        if len(self.coeffs) == 0:
            return np.zeros(1, dtype=CT)
        others = np.ones(len(self.coeffs), dtype=CT)
        for j in range(self.exps.shape[1]):
            if j != k:
                col = self.exps[:, j]
                if col.any():
                    others = others * point[j] ** col
        deg = int(self.exps[:, k].max())
        out = np.zeros(deg + 1, dtype=CT)
        np.add.at(out, self.exps[:, k], self.coeffs * others)
        return out


def _polyval(asc: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros(np.shape(z), dtype=CT) + asc[-1]
    for c in asc[-2::-1]:
        acc = acc * z + c
    return acc


class _NumRat:
    __slots__ = ("num", "den", "zero")

    def __init__(self, f: RatFunc, zvars):
        self.zero = f.is_zero()
        self.num = _NumPoly(f.num, zvars)
        self.den = _NumPoly(f.den, zvars)

    def at(self, k: int, point: np.ndarray, z: np.ndarray) -> np.ndarray:
        if self.zero:
            return np.zeros(np.shape(z), dtype=CT)
        return _polyval(self.num.univariate(k, point), z) / _polyval(self.den.univariate(k, point), z)


def polished_roots(asc: np.ndarray, steps: int = 4) -> np.ndarray:
    """Companion-matrix eigenvalues, then Newton steps in extended precision."""
    asc = np.trim_zeros(asc, "b")
    if len(asc) <= 1:
        return np.zeros(0, dtype=CT)
    asc = asc.astype(CT)
    roots = np.roots(asc[::-1].astype(complex)).astype(CT)
    d = asc[1:] * np.arange(1, len(asc), dtype=RT)
    for _ in range(steps):
        fp = _polyval(d, roots)
        ok = np.abs(fp) > 0
        roots = np.where(ok, roots - _polyval(asc, roots) / np.where(ok, fp, 1), roots)
    return roots


def refined_solve(a: np.ndarray, b: np.ndarray, rcond: float = 1e-9, steps: int = 3) -> np.ndarray:
    """Minimum-norm least-squares solution of a x = b in extended precision.

    numpy's LAPACK routines are double only, so the double pseudo-inverse is
    used as a preconditioner for iterative refinement.
    """
    pinv = np.linalg.pinv(a.astype(complex), rcond=rcond).astype(CT)
    x = pinv @ b
    for _ in range(steps):
        x = x + pinv @ (b - a @ x)
    return x


def _check_clustering(roots: np.ndarray) -> None:
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            scale = max(1.0, abs(roots[a]), abs(roots[b]))
            if abs(roots[a] - roots[b]) < CLUSTER_TOL * scale:
                raise RootClustering(
                    f"singular points {roots[a]:.3g} and {roots[b]:.3g} are numerically inseparable")


# -- local Laurent solutions ---------------------------------------------------------

@dataclass
class _Locator:
    """Squarefree product of all denominators that can carry poles, plus order bounds."""
    sqfree: _NumPoly | None
    k_fin: int
    k_inf: int


_DFT_CACHE: dict = {}


def _dft_rows(N: int, ms) -> np.ndarray:
    key = (N, tuple(ms))
    mat = _DFT_CACHE.get(key)
    if mat is None:
        k = np.arange(N, dtype=RT)
        mat = np.array([np.exp(CT(-2j) * PI * RT(m) * k / RT(N)) / RT(N) for m in ms], dtype=CT)
        _DFT_CACHE[key] = mat
    return mat


def circle_points(N: int) -> np.ndarray:
    return np.exp(CT(2j) * PI * np.arange(N, dtype=RT) / RT(N))


def _laurent(values: np.ndarray, r, lo: int, hi: int) -> dict:
    """Coefficients c_m, lo <= m <= hi, of a function sampled on a circle of radius r.

    ``values`` has the sample index on axis 0.
    """
    N = values.shape[0]
    ms = list(range(lo, hi + 1))
    coeffs = np.tensordot(_dft_rows(N, ms), values, axes=(1, 0))
    return {m: coeffs[i] / RT(r) ** m for i, m in enumerate(ms)}


def _local_residues(omega_t: np.ndarray, vl: np.ndarray, vr: np.ndarray, r: float,
                    k_l: int, k_r: int) -> np.ndarray:
    """Residue at t = 0 of psi . vR for every (left, right) pair.

    omega_t: (N, nu, nu) samples of Omega^T in the local coordinate (one-form
    coefficient); vl: (N, nl, nu); vr: (N, nr, nu).  k_l and k_r bound the pole
    orders of the left and right data.
    """
    nu = omega_t.shape[1]
    lo = 1 - max(k_l, 1)
    hi = max(k_r, 1) - 1
    # a positive integer exponent (apparent singularity) allows local solutions
    # with deeper poles than the data; start the series low enough to hold them
    lam = np.linalg.eigvals(_laurent(omega_t, r, -1, -1)[-1].astype(np.complex128))
    near = np.abs(lam - np.round(lam.real)) < 1e-6
    if np.any(near):
        lo = min(lo, -int(np.max(np.round(lam.real[near]))))
    A = _laurent(omega_t, r, -1, hi - lo + 1)
    phi = _laurent(vl, r, lo - 1, hi)
    rr = _laurent(vr, r, -1 - hi, -1 - lo)
    nl = vl.shape[1]
    eye = np.eye(nu, dtype=CT)
    # right-hand sides below this are rounding noise from the Laurent extraction
    floor = 1e-6 * max(float(np.max(np.abs(vl))) * float(r), 1e-300) if vl.size else 1e-300
    psi = {}
    for m in range(lo, hi + 1):
        rhs = phi[m - 1].T.copy()                    # (nu, nl)
        for b in range(0, m - lo):
            rhs = rhs - A[b] @ psi[m - 1 - b]
        # a resonant residue (m + eigenvalue = 0, e.g. nilpotent at m = 0) leaves
        # psi_m ambiguous; truncated SVD picks the minimum-norm solution stably
        lhs = m * eye + A[-1]
        psi[m] = refined_solve(lhs, rhs, RESONANCE_RCOND)
        if _inconsistent(lhs @ psi[m] - rhs, rhs, floor):
            # an earlier free component was fixed badly; redo all orders at once
            psi = _solve_jointly(A, phi, lo, hi, nu, nl, floor)
            break
    res = np.zeros((nl, vr.shape[1]), dtype=CT)
    for m in range(lo, hi + 1):
        res = res + psi[m].T @ rr[-1 - m].T
    return res


def _inconsistent(resid: np.ndarray, rhs: np.ndarray, floor: float) -> bool:
    scale = max(float(np.max(np.abs(rhs))) if rhs.size else 0.0, floor)
    return float(np.max(np.abs(resid), initial=0.0)) > RESONANCE_TOL * scale


def _solve_jointly(A: dict, phi: dict, lo: int, hi: int, nu: int, nl: int,
                   floor: float) -> dict:
    """All Laurent orders of psi from one block lower-triangular system.

    Needed at apparent singularities, where integer local exponents leave free
    components whose values decide whether later orders are solvable.  If no
    choice works, the local solution has logarithms and the sample is resonant.
    """
    K = hi - lo + 1
    big = np.zeros((K * nu, K * nu), dtype=CT)
    rhs = np.zeros((K * nu, nl), dtype=CT)
    eye = np.eye(nu, dtype=CT)
    for i, m in enumerate(range(lo, hi + 1)):
        rows = slice(i * nu, (i + 1) * nu)
        rhs[rows] = phi[m - 1].T
        big[rows, rows] = m * eye + A[-1]
        for b in range(0, m - lo):
            j = i - 1 - b
            big[rows, j * nu:(j + 1) * nu] = A[b]
    x = refined_solve(big, rhs, RESONANCE_RCOND)
    if _inconsistent(big @ x - rhs, rhs, floor):
        raise ResonantSample("local exponent is an integer at this sample")
    return {m: x[i * nu:(i + 1) * nu] for i, m in enumerate(range(lo, hi + 1))}


def _circle_count(k: int, n_points: int) -> int:
    need = 4 * k + 24
    N = n_points
    while N < need:
        N *= 2
    return N


def _laurent_pairing(evaluate, roots: np.ndarray, k_fin: int, k_inf: int,
                     n_points: int = 64) -> np.ndarray:
    """Sum of local residues over all finite singular points and infinity.

    ``evaluate(z)`` returns (Omega (N,nu,nu), VL (N,nl,nu), VR (N,nr,nu)) at the
    array of points z.
    """
    N = _circle_count(max(k_fin, k_inf), n_points)
    circle = circle_points(N)
    total = None
    for i, z0 in enumerate(roots):
        others = [abs(z0 - w) for j, w in enumerate(roots) if j != i]
        r = 0.5 * min(others) if others else 1.0
        z = z0 + r * circle
        om, vl, vr = evaluate(z)
        res = _local_residues(np.transpose(om, (0, 2, 1)), vl, vr, r, k_fin, k_fin)
        total = res if total is None else total + res
    rmax = max([abs(x) for x in roots], default=0.0)
    rw = 0.5 / rmax if rmax > 0 else 1.0
    w = rw * circle
    z = 1.0 / w
    om, vl, vr = evaluate(z)
    jac = (-1.0 / w ** 2)
    om = om * jac[:, None, None]
    vl = vl * jac[:, None, None]
    vr = vr * jac[:, None, None]
    res = _local_residues(np.transpose(om, (0, 2, 1)), vl, vr, rw, k_inf, k_inf)
    return res if total is None else total + res


# -- univariate oracle ----------------------------------------------------------------

def _lcm_raw(polys):
    den = None
    for d in polys:
        if den is None:
            den = d
        elif d != den:
            den = den * (d / den.gcd(d))
    return den


def _locator(reg, var: str, rats: Sequence[RatFunc], zvars) -> _Locator:
    dens = [f._d for f in rats if not f.is_zero()]
    den = _lcm_raw(dens) if dens else None
    k_fin, sq = 1, None
    if den is not None and den.degrees()[reg.index(var)] > 0:
        facs = squarefree_factor(MultiPoly(reg, den), var)
        k_fin = max(e for _, e in facs)
        prod = None
        for q, _ in facs:
            prod = q if prod is None else prod * q
        sq = _NumPoly(prod, zvars)
    k_inf = 1
    for f in rats:
        if not f.is_zero():
            dn, dd = f.degree(var)
            k_inf = max(k_inf, dn - dd + 2)
    return _Locator(sq, k_fin, k_inf)


def _roots_at(loc: _Locator, k: int, point: np.ndarray) -> np.ndarray:
    if loc.sqfree is None:
        return np.zeros(0, dtype=CT)
    roots = polished_roots(loc.sqfree.univariate(k, point))
    _check_clustering(roots)
    return roots


def _substituted(x: RatFunc, sample: NumericSample | None) -> RatFunc:
    return x if sample is None else substitute(x, sample.exact(x.registry))


def numeric_univariate_intersection(omega: ConnectionMatrix, vl: CocycleVec, vr: CocycleVec,
                                    sample: NumericSample | None = None, *,
                                    n_points: int = 64, return_both: bool = False):
    """Numeric value of the final univariate pairing at a parameter sample.

    Path (a) is the critical-point sum (needs simple-pole data), path (b) the
    local Laurent solutions.  Returns (a) and raises ToleranceExceeded when
    the two disagree; if the data still has higher poles only (b) is used.
    """
    reg = omega.entries[0][0].registry
    var = omega.active_var
    zvars = [var]
    tol = sample.tolerance if sample is not None else 1e-8
    om = [[_substituted(x, sample) for x in row] for row in omega.entries]
    a_ = [_substituted(x, sample) for x in vl.coeffs]
    b_ = [_substituted(x, sample) for x in vr.coeffs]
    for x in [y for row in om for y in row] + a_ + b_:
        if any(x.depends_on(v) for v in reg.names if v != var):
            raise OracleError("univariate oracle needs data in the active variable only")
    k = 0
    point = np.zeros(1, dtype=CT)
    n_om = [[_NumRat(x, zvars) for x in row] for row in om]
    n_l = [_NumRat(x, zvars) for x in a_]
    n_r = [_NumRat(x, zvars) for x in b_]
    nu = len(om)

    def evaluate(z):
        O = np.stack([np.stack([e.at(k, point, z) for e in row], axis=-1) for row in n_om], axis=-2)
        L = np.stack([f.at(k, point, z) for f in n_l], axis=-1)[:, None, :]
        R = np.stack([f.at(k, point, z) for f in n_r], axis=-1)[:, None, :]
        return O, L, R

    loc = _locator(reg, var, [x for row in om for x in row] + a_ + b_, zvars)
    roots = _roots_at(loc, k, point)
    path_b = complex(_laurent_pairing(evaluate, roots, loc.k_fin, loc.k_inf, n_points)[0, 0])

    if not (CocycleVec(0, "L", var, a_).is_simple() and CocycleVec(0, "R", var, b_).is_simple()):
        return (None, path_b) if return_both else path_b

    om_exact = ConnectionMatrix(var, om)
    P = _NumPoly(om_exact.det_num, zvars).univariate(0, point)
    Qn = _NumPoly(om_exact.det_den, zvars)
    pr = polished_roots(P)
    _check_clustering(pr)
    P = np.trim_zeros(P, "b")
    dP = P[1:] * np.arange(1, len(P), dtype=RT)
    adj = [[_NumRat(x, zvars) for x in row] for row in om_exact.adj]
    path_a = CT(0)
    for r in pr:
        zz = np.array([r], dtype=CT)
        val = CT(0)
        for i in range(nu):
            for j in range(nu):
                val += n_l[i].at(k, point, zz)[0] * adj[i][j].at(k, point, zz)[0] * n_r[j].at(k, point, zz)[0]
        val *= _polyval(Qn.univariate(0, point), zz)[0]
        path_a -= val / _polyval(dP, zz)[0]
    scale = max(abs(path_a), abs(path_b), 1e-300)
    if abs(path_a - path_b) > max(tol, 1e-7) * scale:
        raise ToleranceExceeded(
            f"critical-point sum {path_a} and local-residue sum {path_b} disagree")
    path_a = complex(path_a)
    return (path_a, path_b) if return_both else path_a


# -- full recursion ---------------------------------------------------------------------

class NumericRecursion:
    """Numeric evaluation of the recursive pairing at a fixed parameter sample."""

    def __init__(self, plan: FibrationPlan, sample: NumericSample, n_points: int = 64):
        self.sample = sample
        self.n_points = n_points
        reg = plan.registry
        if not _exponents_generic(plan.twist, sample.bindings):
            raise ResonantSample("an exponent or a sum of exponents is an integer at this sample")
        ex = sample.exact(reg)
        self.reg = reg
        self.order = plan.order
        self.n = plan.n
        self.zvars = list(plan.order)
        twist = plan.twist.substitute(ex)
        bases, duals = {}, {}
        for lvl in range(1, plan.n):
            b = plan.basis(lvl)
            bases[lvl] = [substitute(x, ex) for x in b.elements]
            duals[lvl] = [substitute(x, ex) for x in b.duals]
        # the exact plan at the sample is used for pole locations only
        self.locations = FibrationPlan(twist, plan.order, bases, duals, check=False)
        self.conn = self.locations.conn
        self._compiled: dict = {}
        self._locators: dict = {}

    def _num(self, f: RatFunc) -> _NumRat:
        key = str(f)
        c = self._compiled.get(key)
        if c is None:
            c = self._compiled[key] = _NumRat(f, self.zvars)
        return c

    def _locator(self, level: int, lefts, rights) -> _Locator:
        key = (level, tuple(str(x) for x in lefts), tuple(str(x) for x in rights))
        loc = self._locators.get(key)
        if loc is None:
            plan = self.locations
            var = self.order[level - 1]
            om = plan.connection_matrix(level)
            rats = [x for row in om.entries for x in row]
            for f in lefts:
                rats += plan.expand_left(f, level).coeffs
            for f in rights:
                rats += plan.expand_right(f, level).coeffs
            loc = self._locators[key] = _locator(self.reg, var, rats, self.zvars)
        return loc

    def pair_matrix(self, level: int, lefts, rights, point: np.ndarray) -> np.ndarray:
        """Numeric <lefts_a | rights_b> over the first ``level`` variables.

        ``point`` holds values for all variables in fibration order; only the
        entries beyond ``level`` are read.
        """
        k = level - 1
        loc = self._locator(level, lefts, rights)
        roots = _roots_at(loc, k, point)
        var = self.order[k]
        if level == 1:
            w = self._num(self.conn[var])
            L = [self._num(f) for f in lefts]
            R = [self._num(f) for f in rights]

            def evaluate(z):
                O = w.at(k, point, z)[:, None, None]
                VL = np.stack([f.at(k, point, z) for f in L], axis=-1)[:, :, None]
                VR = np.stack([f.at(k, point, z) for f in R], axis=-1)[:, :, None]
                return O, VL, VR
        else:
            prev = self.locations.level(level - 1)
            es = prev.basis.elements
            hs = prev.basis.duals
            shifted = [e.derivative(var) + self.conn[var] * e for e in es]
            inner_left = list(es) + shifted + list(lefts)
            inner_right = list(hs) + list(rights)
            nu = len(es)

            def evaluate(z):
                Os, VLs, VRs = [], [], []
                for zz in z:
                    pt = point.copy()
                    pt[k] = zz
                    M = self.pair_matrix(level - 1, inner_left, inner_right, pt)
                    C = M[:nu, :nu]
                    Ci = refined_solve(C, np.eye(nu, dtype=CT), 1e-14)
                    Os.append(M[nu:2 * nu, :nu] @ Ci)
                    VLs.append(M[2 * nu:, :nu] @ Ci)
                    VRs.append(M[:nu, nu:].T)
                return np.array(Os), np.array(VLs), np.array(VRs)

        return _laurent_pairing(evaluate, roots, loc.k_fin, loc.k_inf, self.n_points)

    def intersection(self, phi_l: RatFunc, phi_r: RatFunc) -> complex:
        ex = self.sample.exact(self.reg)
        a = substitute(phi_l, ex)
        b = substitute(phi_r, ex)
        point = np.zeros(max(self.n, 1), dtype=CT)
        return complex(self.pair_matrix(self.n, [a], [b], point)[0, 0])


def numeric_intersection(plan: FibrationPlan, phi_l: RatFunc, phi_r: RatFunc,
                         sample: NumericSample, n_points: int = 64) -> complex:
    """End-to-end numeric intersection number of the job described by ``plan``."""
    return NumericRecursion(plan, sample, n_points).intersection(phi_l, phi_r)


def numeric_pair_matrix(plan: FibrationPlan, lefts, rights, sample: NumericSample,
                        n_points: int = 64) -> np.ndarray:
    """Numeric matrix <lefts_a|rights_b> at the top level, one recursion for all pairs."""
    rec = NumericRecursion(plan, sample, n_points)
    ex = sample.exact(plan.registry)
    a = [substitute(f, ex) for f in lefts]
    b = [substitute(f, ex) for f in rights]
    point = np.zeros(max(plan.n, 1), dtype=CT)
    return rec.pair_matrix(plan.n, a, b, point)


def numeric_projection(plan: FibrationPlan, lefts, sample: NumericSample,
                       n_points: int = 64) -> np.ndarray:
    """Coefficients of each form in ``lefts`` on the top-level basis, numerically.

    Row a holds <lefts_a|d_j>, obtained as N C^-1 from numeric pairings with
    the candidate duals.
    """
    top = plan.level(plan.n) if plan.n else None
    es = list(top.basis.elements)
    hs = list(top.basis.duals)
    M = numeric_pair_matrix(plan, es + list(lefts), hs, sample, n_points)
    nu = len(es)
    C, N = M[:nu], M[nu:]
    # X C = N  <=>  C^T X^T = N^T
    return refined_solve(C.T, N.T, 1e-14).T


def _relative_gap(num: np.ndarray, ex: np.ndarray) -> float:
    scale = float(np.max(np.abs(ex))) if ex.size else 0.0
    # an exactly vanishing result is compared in absolute terms
    return float(np.max(np.abs(num - ex))) / (scale if scale > 0 else 1.0)


def check_projection_against_oracle(plan: FibrationPlan, lefts, exact_rows, count: int,
                                    seed: int = 0, tolerance: float = 1e-8,
                                    n_points: int = 64) -> list:
    """Like check_against_oracle, for matrices of top-level expansion coefficients."""
    reg = plan.registry
    out = []
    for i in range(count):
        last = None
        for attempt in range(MAX_RETRIES + 1):
            s = random_sample(list(reg.params), seed * 7919 + i * 101 + attempt, plan.twist,
                              tolerance)
            try:
                ex = np.array([[evaluate_exact(v, s) for v in row] for row in exact_rows])
                num = numeric_projection(plan, lefts, s, n_points).astype(np.complex128)
            except (RootClustering, ResonantSample, ZeroDivisionError,
                    np.linalg.LinAlgError) as exc:
                last = exc
                continue
            except TwistIntError as exc:
                if isinstance(exc, OracleError):
                    raise
                last = exc
                continue
            rel = _relative_gap(num, ex)
            if rel > tolerance:
                raise ToleranceExceeded(f"oracle mismatch at {s}: rel err {rel:.3g}")
            out.append(OracleRecord(s, num, ex, rel))
            break
        else:
            if isinstance(last, RootClustering):
                raise last
            raise OracleError(f"no usable sample after {MAX_RETRIES} retries: {last}")
    return out


def _json_value(x):
    """complex -> [re, im]; arrays become nested lists of such pairs."""
    if isinstance(x, np.ndarray):
        return [_json_value(v) for v in x]
    x = complex(x)
    return [x.real, x.imag]


@dataclass
class OracleRecord:
    sample: NumericSample
    numeric: complex
    exact_at_sample: complex
    rel_err: float

    def as_dict(self) -> dict:
        return {
            "sample": {k: str(v) for k, v in self.sample.bindings.items()},
            "numeric": _json_value(self.numeric),
            "exact_at_sample": _json_value(self.exact_at_sample),
            "rel_err": float(self.rel_err),
        }


def check_against_oracle(plan: FibrationPlan, phi_l: RatFunc, phi_r: RatFunc, exact: RatFunc,
                         count: int, seed: int = 0, tolerance: float = 1e-8,
                         n_points: int = 64) -> list:
    """Compare ``exact`` with numeric evaluations at ``count`` random samples.

    Samples that hit a pole of the exact result or whose singular points
    cluster are redrawn, at most MAX_RETRIES times each.
    """
    reg = plan.registry
    params = [p for p in reg.params]
    out = []
    for i in range(count):
        last = None
        for attempt in range(MAX_RETRIES + 1):
            s = random_sample(params, seed * 7919 + i * 101 + attempt, plan.twist, tolerance)
            try:
                ex = evaluate_exact(exact, s)
                num = numeric_intersection(plan, phi_l, phi_r, s, n_points)
            except (RootClustering, ResonantSample, ZeroDivisionError,
                    np.linalg.LinAlgError) as exc:
                last = exc
                continue
            except TwistIntError as exc:
                if isinstance(exc, (OracleError,)):
                    raise
                last = exc
                continue
            rel = abs(num - ex) / (abs(ex) if ex != 0 else 1.0)
            rec = OracleRecord(s, num, ex, rel)
            if rel > tolerance:
                raise ToleranceExceeded(
                    f"oracle mismatch at {s}: numeric {num}, exact {ex}, rel err {rel:.3g}")
            out.append(rec)
            break
        else:
            if isinstance(last, RootClustering):
                raise last
            raise OracleError(f"no usable sample after {MAX_RETRIES} retries: {last}")
    return out
