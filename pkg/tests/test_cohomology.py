import pytest

from twistint.algebra import VarRegistry
from twistint.cohomology import (
    CohomologyBasis, Twist, buchberger, check_assumptions, cohomology_dim, critical_quotient,
    inverse_rotation_bindings, monomial_basis, rotate_coordinates, standard_monomials,
    twist_connection,
)
from twistint.errors import AlgebraError, DegenerateFibration, NonGenericExponent, NotZeroDimensional
from twistint.intersect import ConnectionMatrix, FibrationPlan
from twistint.parsing import parse_ratfunc


def P(text, reg):
    return parse_ratfunc(text, reg)


def twist(reg, *pairs):
    return Twist(reg, tuple((P(b, reg), P(e, reg)) for b, e in pairs))


@pytest.fixture
def cyclotomic():
    r = VarRegistry(["z1"], ["g"])
    return twist(r, ("z1", "g"), ("z1^6+z1^5+z1^4+z1^3+z1^2+z1+1", "g"))


@pytest.fixture
def elliptic():
    r = VarRegistry(["z1", "z2"], ["g"])
    return twist(r, ("z1", "g"), ("z2", "g"), ("z2^2-4*z1^3+11*z1-7", "g"))


@pytest.fixture
def third():
    r = VarRegistry(["z1", "z2"], ["e", "a4", "a5"])
    return twist(r, ("z1", "1/2+e"), ("z2", "1/2+e"),
                 ("z1^2*z2+z1*z2^2+z1+a4*z1*z2+a5*z2", "-1/2"))


def test_connection_examples(cyclotomic, elliptic):
    r = VarRegistry(["z"], ["g"])
    assert str(twist_connection(twist(r, ("z", "g")))["z"]) == "g/z"
    r1 = cyclotomic.registry
    w = P("g*(7*z1^6+6*z1^5+5*z1^4+4*z1^3+3*z1^2+2*z1+1)/(z1*(z1^6+z1^5+z1^4+z1^3+z1^2+z1+1))", r1)
    assert twist_connection(cyclotomic)["z1"] == w
    r2 = elliptic.registry
    w2 = P("g*(3*z2^2-4*z1^3+11*z1-7)/(z2*(z2^2-4*z1^3+11*z1-7))", r2)
    w1 = P("g*(z2^2-16*z1^3+22*z1-7)/(z1*(z2^2-4*z1^3+11*z1-7))", r2)
    conn = twist_connection(elliptic)
    assert conn["z2"] == w2 and conn["z1"] == w1


def test_integer_exponent_rejected():
    r = VarRegistry(["z"], ["g"])
    with pytest.raises(NonGenericExponent):
        twist(r, ("z", "2"))
    with pytest.raises(NonGenericExponent):
        twist(r, ("z", "0"))
    with pytest.raises(AlgebraError):
        twist(r, ("z", "g*z"))
    with pytest.raises(AlgebraError):
        twist(r, ("1/z", "g"))


def test_buchberger_examples():
    r = VarRegistry(["z"])
    gb = buchberger([P("z", r)], ["z"])
    assert [str(x.to_ratfunc(r)) for x in gb] == ["z"]
    assert standard_monomials(gb, ["z"]) == [(0,)]
    r2 = VarRegistry(["z1", "z2"])
    # z2 > z1: one S-polynomial, nothing new
    gb = buchberger([P("z1^2", r2), P("z2-z1", r2)], ["z2", "z1"])
    got = {str(x.to_ratfunc(r2)) for x in gb}
    assert got == {str(P("z2-z1", r2)), "z1^2"}
    assert sorted(standard_monomials(gb, ["z2", "z1"])) == [(0, 0), (0, 1)]


def test_univariate_numerator_is_its_own_basis(cyclotomic):
    conn = twist_connection(cyclotomic)
    cq = critical_quotient(conn, ["z1"])
    assert len(cq.groebner) == 1
    assert cq.groebner[0].to_ratfunc(cyclotomic.registry) == P(
        "7*z1^6+6*z1^5+5*z1^4+4*z1^3+3*z1^2+2*z1+1", cyclotomic.registry) / 7
    assert [str(m) for m in monomial_basis(conn, 1, ["z1"])] == [
        "1", "z1", "z1^2", "z1^3", "z1^4", "z1^5"]


def test_dimensions(cyclotomic, elliptic, third):
    assert cohomology_dim(twist_connection(cyclotomic), 1) == 6
    conn = twist_connection(elliptic)
    assert cohomology_dim(conn, 2) == 6
    assert cohomology_dim(conn, 1, ["z2", "z1"]) == 2
    assert cohomology_dim(conn, 1, ["z1", "z2"]) == 3
    assert sorted(str(m) for m in monomial_basis(conn, 2, ["z1", "z2"])) == sorted(
        ["1", "z1", "z2", "z1*z2", "z1^2", "z1^2*z2"])
    assert cohomology_dim(twist_connection(third), 2) == 4


def test_beta_twist_has_one_critical_point():
    r = VarRegistry(["z"], ["g", "h"])
    u = twist(r, ("z", "g"), ("z-1", "h"))
    assert cohomology_dim(twist_connection(u), 1) == 1


def test_critical_points_on_a_twist_factor_are_dropped():
    # the numerators of d ln u vanish only at the origin, which lies on z1 = 0
    r = VarRegistry(["z1", "z2"], ["a", "b", "c"])
    u = twist(r, ("z1", "a"), ("z2", "b"), ("z1+z2", "c"))
    cq = critical_quotient(twist_connection(u), ["z1", "z2"])
    assert len(cq.standard) == 1 and cq.dim == 0


def test_curve_of_critical_points_rejected():
    r = VarRegistry(["z1", "z2"], ["g"])
    u = twist(r, ("z1", "g"), ("z2", "g"), ("z1*z2-1", "g"))
    with pytest.raises(NotZeroDimensional):
        cohomology_dim(twist_connection(u), 2)


def test_check_assumptions_on_elliptic(elliptic):
    plan = FibrationPlan(elliptic, ["z2", "z1"])
    om = plan.connection_matrix(2)
    rep = check_assumptions(om, 6)
    assert rep.passed and rep.det_degree == 6
    bad = check_assumptions(om, 5, raise_on_failure=False)
    assert not bad.passed and bad.simple
    with pytest.raises(DegenerateFibration):
        check_assumptions(om, 5)


def test_scalar_check():
    r = VarRegistry(["z"], ["g"])
    om = ConnectionMatrix("z", [[P("g/z + g/(z-1)", r)]])
    assert check_assumptions(om, 1).passed
    assert not check_assumptions(om, 2, raise_on_failure=False).degree_ok


def test_rotation_identity_and_inverse(elliptic):
    same = rotate_coordinates(elliptic, "z1", "z2", 1, 0)
    assert [(str(p), str(g)) for p, g in same.factors] == [
        (str(p), str(g)) for p, g in elliptic.factors]
    rot = rotate_coordinates(elliptic, "z1", "z2", 1, 2)
    back = rot.substitute(inverse_rotation_bindings(elliptic.registry, "z1", "z2", 1, 2))
    for (p, g), (q, h) in zip(back.factors, elliptic.factors):
        assert p == q and g == h
    with pytest.raises(AlgebraError):
        rotate_coordinates(elliptic, "z1", "z2", 0, 0)


def test_basis_needs_matching_duals():
    r = VarRegistry(["z"], ["g"])
    with pytest.raises(AlgebraError):
        CohomologyBasis(1, [r.one(), r.var("z")], [r.one()])
    b = CohomologyBasis(1, [r.one()])
    assert b.duals == [r.one()] and b.nu == 1
