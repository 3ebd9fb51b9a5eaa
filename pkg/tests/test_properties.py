"""Randomized invariants.  Each ``test_*`` here is also run by the acceptance suite."""
import random

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from conftest import random_job
from twistint.algebra import (
    RatFunc, VarRegistry, adjugate, determinant, extended_euclid, gcd_poly, identity, matmul,
    partial_fractions, poly_divmod, ratfunc_normalize, squarefree_factor,
)
from twistint.cohomology import Twist
from twistint.errors import AssumptionError, GenericityError
from twistint.intersect import FibrationPlan
from twistint.parsing import parse_ratfunc
from twistint.residue import bezoutian_dual, global_residue_of

REG = VarRegistry(["z"], ["g"])
SETTINGS = dict(max_examples=100, deadline=None, derandomize=True,
                suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])

small = st.integers(-4, 4)
# coefficients are affine in g so the residual field is Q(g)
coeff = st.tuples(small, small).map(lambda t: f"({t[0]}+({t[1]})*g)")


def _poly(coeffs) -> RatFunc:
    return parse_ratfunc("+".join(f"{c}*z^{k}" for k, c in enumerate(coeffs)) or "0", REG)


polys = st.lists(coeff, min_size=1, max_size=5).map(_poly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())
positive_degree = polys.filter(lambda p: p.num.degree("z") >= 1)


def _jobs(n=None):
    return st.integers(0, 10 ** 6).map(lambda s: random_job(random.Random(s), n))


def _plan_or_skip(tw, order=None):
    try:
        plan = FibrationPlan(tw, order)
        for lvl in range(1, plan.n + 1):
            plan.connection_matrix(lvl)
        return plan
    except (AssumptionError, GenericityError):
        assume(False)


# -- algebra ------------------------------------------------------------------------

@settings(**SETTINGS)
@given(polys, nonzero_polys)
def test_normalization_idempotent(a, b):
    f = a / b
    again = ratfunc_normalize(f.num, f.den)
    assert again == f and str(again) == str(f)
    assert parse_ratfunc(str(f), REG) == f


@settings(**SETTINGS)
@given(polys, positive_degree)
def test_division_identity(a, b):
    q, r = poly_divmod(a, b, "z")
    assert q * b + r == a
    assert r.is_zero() or r.num.degree("z") < b.num.degree("z")


@settings(**SETTINGS)
@given(nonzero_polys, nonzero_polys)
def test_bezout_identity(a, b):
    g, s, t = extended_euclid(a, b, "z")
    assert s * a + t * b == g
    q1, r1 = poly_divmod(a, g, "z")
    q2, r2 = poly_divmod(b, g, "z")
    assert r1.is_zero() and r2.is_zero()


@settings(**SETTINGS)
@given(polys, st.lists(positive_degree, min_size=1, max_size=3))
def test_partial_fractions_recombine(a, dens):
    den = REG.one()
    for d in dens:
        den = den * d
    f = a / den
    assert partial_fractions(f, "z").recombine() == f


@settings(**SETTINGS)
@given(st.lists(st.tuples(positive_degree, st.integers(1, 3)), min_size=1, max_size=3))
def test_squarefree_parts_coprime(parts):
    p = REG.one()
    for q, e in parts:
        p = p * q ** e
    sf = squarefree_factor(p, "z")
    prod = REG.one()
    for i, (q, e) in enumerate(sf):
        qf = RatFunc.from_poly(q)
        prod = prod * qf ** e
        # squarefree: coprime to its own derivative
        g, _, _ = extended_euclid(qf, qf.derivative("z"), "z")
        assert g.num.degree("z") == 0
        for q2, _ in sf[i + 1:]:
            assert gcd_poly(q, q2).degree("z") == 0
    # the product gives p back up to a z-free unit
    assert not (p / prod).depends_on("z")


@settings(**SETTINGS)
@given(st.integers(1, 3), st.data())
def test_adjugate_identity(n, data):
    m = [[data.draw(polys) / data.draw(nonzero_polys) for _ in range(n)] for _ in range(n)]
    assume(not determinant(m).is_zero())
    det, adj = adjugate(m)
    prod = matmul(adj, m)
    eye = identity(REG, n)
    assert all(prod[i][j] == det * eye[i][j] for i in range(n) for j in range(n))


# -- residues -------------------------------------------------------------------------

@settings(**SETTINGS)
@given(positive_degree, polys, polys, small, small)
def test_global_residue_linear(P, f, h, a, b):
    lhs = global_residue_of(a * f + b * h, P, "z")
    assert lhs == a * global_residue_of(f, P, "z") + b * global_residue_of(h, P, "z")


@settings(**SETTINGS)
@given(positive_degree)
def test_bezoutian_duality(P):
    w = bezoutian_dual(P, "z")
    z = REG.var("z")
    for i in range(len(w)):
        for j in range(len(w)):
            want = REG.one() if i == j else REG.zero()
            assert global_residue_of(z ** i * w[j], P, "z") == want


R0 = VarRegistry(["z"])


def _asc(cs) -> RatFunc:
    return parse_ratfunc("+".join(f"({c})*z^{k}" for k, c in enumerate(cs)), R0)


@settings(**{**SETTINGS, "max_examples": 200})
@given(st.lists(st.integers(-9, 9), min_size=3, max_size=6),
       st.lists(st.integers(-9, 9), min_size=1, max_size=6),
       st.lists(st.integers(-9, 9), min_size=1, max_size=3))
def test_residue_matches_root_sum(pc, fc, hc):
    # f = num/den with den = h + z^3 + 11, so f has poles off the zeros of P too
    assume(pc[-1] != 0)
    dc = [0, 0, 0, 0]
    for k, c in enumerate(hc):
        dc[k] += c
    dc[0] += 11
    dc[3] += 1
    roots = np.roots(pc[::-1])
    assume(min(abs(x - y) for i, x in enumerate(roots) for y in roots[i + 1:]) > 1e-3)
    den_at = np.polyval(dc[::-1], roots)
    assume(np.all(np.abs(den_at) > 1e-3))
    weight = 1 / np.abs(den_at * np.polyval(np.polyder(pc[::-1]), roots))
    terms = np.polyval(fc[::-1], roots) / den_at / np.polyval(np.polyder(pc[::-1]), roots)
    exact = float(global_residue_of(_asc(fc) / _asc(dc), _asc(pc), "z").constant_value())
    # rounding in evaluating num at the roots is relative to sum |c_k| |r|^k
    cond = np.polyval(np.abs(fc[::-1]), np.abs(roots))
    scale = max(float(np.sum(cond * weight)), abs(exact))
    assert abs(complex(np.sum(terms)) - exact) <= 1e-10 * scale


# -- intersection numbers ---------------------------------------------------------------

@settings(**SETTINGS)
@given(_jobs())
def test_duality_at_every_level(job):
    tw, _, _ = job
    plan = _plan_or_skip(tw)
    r = plan.registry
    for lvl in range(1, plan.n + 1):
        es = plan.basis(lvl).elements
        ds = plan.dual_basis(lvl)
        for i, e in enumerate(es):
            for j, d in enumerate(ds):
                assert plan.pair(lvl, e, d) == (r.one() if i == j else r.zero())


@settings(**SETTINGS)
@given(_jobs())
def test_left_and_right_connections_agree(job):
    tw, _, _ = job
    plan = _plan_or_skip(tw)
    for lvl in range(1, plan.n + 1):
        assert plan.connection_matrix(lvl).entries == plan.connection_matrix_right(lvl)


def _exact_form(tw: Twist, xi, sign: int) -> RatFunc:
    """nabla xi for the connection d + sign*omega; xi is a function (n=1) or a pair (n=2)."""
    zs = tw.registry.z_vars
    w = {z: sign * tw.log_derivative(z) for z in zs}
    if len(zs) == 1:
        z = zs[0]
        return xi[0].derivative(z) + w[z] * xi[0]
    z1, z2 = zs
    # xi = xi1 dz1 + xi2 dz2
    return (xi[1].derivative(z1) + w[z1] * xi[1]) - (xi[0].derivative(z2) + w[z2] * xi[0])


@settings(**SETTINGS)
@given(_jobs(), st.data())
def test_gauge_invariance(job, data):
    tw, left, right = job
    plan = _plan_or_skip(tw)
    reg = plan.registry
    zs = list(reg.z_vars)
    bases = [RatFunc.from_poly(p) for p, _ in tw.factors]

    def xi():
        num = data.draw(st.sampled_from(["1", "2"] + zs))
        den = data.draw(st.sampled_from(bases))
        return parse_ratfunc(num, reg) / den

    base = plan.intersection_number(left, right)
    xl = [xi() for _ in zs]
    xr = [xi() for _ in zs]
    assert plan.intersection_number(left + _exact_form(tw, xl, 1), right) == base
    assert plan.intersection_number(left, right + _exact_form(tw, xr, -1)) == base


@settings(**SETTINGS)
@given(_jobs())
def test_swap_symmetry(job):
    tw, left, right = job
    plan = _plan_or_skip(tw)
    dual = _plan_or_skip(tw.negated())
    sign = (-1) ** plan.n
    assert plan.intersection_number(left, right) == sign * dual.intersection_number(right, left)


@settings(**SETTINGS)
@given(_jobs(2))
def test_order_independence(job):
    tw, left, right = job
    a = _plan_or_skip(tw, ["z1", "z2"])
    b = _plan_or_skip(tw, ["z2", "z1"])
    assert a.intersection_number(left, right) == b.intersection_number(left, right)


PROPERTIES = [
    test_normalization_idempotent, test_division_identity, test_bezout_identity,
    test_partial_fractions_recombine, test_squarefree_parts_coprime, test_adjugate_identity,
    test_global_residue_linear, test_bezoutian_duality, test_residue_matches_root_sum,
    test_duality_at_every_level, test_left_and_right_connections_agree, test_gauge_invariance,
    test_swap_symmetry, test_order_independence,
]
