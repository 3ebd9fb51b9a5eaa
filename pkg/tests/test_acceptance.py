"""One test per acceptance criterion; each records a PASS/FAIL line printed at the end of the run."""
import time

import pytest

import test_properties
from conftest import ACCEPTANCE, job_text, load_problem
from twistint.algebra import rank, substitute, transfer
from twistint.cli import parse_job, run_job
from twistint.errors import DegenerateFibration
from twistint.feynman import de_matrix, dual_element, flatness_defect, reduction_coefficient
from twistint.intersect import FibrationPlan
from twistint.oracle import check_against_oracle, check_projection_against_oracle
from twistint.parsing import parse_ratfunc


def record(k, checks: dict, seconds=None, limit=None):
    """Store the verdict for criterion k, then fail the test if any check failed."""
    checks = dict(checks)
    if limit is not None:
        checks[f"runtime {seconds:.1f}s < {limit}s"] = seconds < limit
    failed = [name for name, ok in checks.items() if not ok]
    detail = "all checks hold" if not failed else "failed: " + "; ".join(failed)
    if seconds is not None:
        detail += f" ({seconds:.1f}s)"
    ACCEPTANCE[k] = (not failed, detail)
    assert not failed, detail


def P(text, reg):
    return parse_ratfunc(text, reg)


CUBIC = "(4*z1^3-11*z1+7)"
CYC = "(z1^6+z1^5+z1^4+z1^3+z1^2+z1+1)"


def test_criterion_1_univariate():
    t0 = time.perf_counter()
    prob = load_problem("univariate")
    plan = prob.plan()
    got = plan.intersection_number(prob.left, prob.right)
    seconds = time.perf_counter() - t0
    r = prob.registry
    red = plan.reduced_log[-1]
    phi_l = P(f"g/(1-g)*(6*z1^5+5*z1^4+4*z1^3+3*z1^2+2*z1+1)/(z1*{CYC})", r)
    phi_r = P(f"-g/(1-7*g)*(z1^5+2*z1^4+3*z1^3+4*z1^2+5*z1+6)/{CYC}", r)
    # every trace expression must be a rational function in the declared names
    texts = [rec["det"] for rec in plan.trace] + red["left"] + red["right"]
    rational = True
    for t in texts:
        try:
            P(t, r)
        except Exception:
            rational = False
    record(1, {
        "result": got == P("6*g/((1-g)*(1-7*g))", r),
        "reduced left form": red["left"] == [str(phi_l)],
        "reduced right form": red["right"] == [str(phi_r)],
        "no algebraic extension in the trace": rational,
    }, seconds, 5)


def test_criterion_2_elliptic():
    t0 = time.perf_counter()
    prob = load_problem("elliptic")
    r = prob.registry
    want = P("1/(4*(1-11*g)*g)", r)
    p21 = prob.plan(["z2", "z1"])
    p12 = prob.plan(["z1", "z2"])
    res21 = p21.intersection_number(prob.left, prob.right)
    res12 = p12.intersection_number(prob.left, prob.right)
    det21 = P(f"(4*(3+11*g)*z1^3-11*(1+5*g)*z1+14*g)*(4*(6+11*g)*z1^3-11*(2+5*g)*z1+14*g)"
              f"/(4*z1^2*(z1-1)^2*(4*z1^2+4*z1-7)^2)", r)
    det12 = P("((2+11*g)*(4+11*g)*(6+11*g)*z2^6-231*g*(33*g^2+24*g+4)*z2^4"
              "+2*g^2*(3949*g+1315)*z2^2+56*g^3)/(z2^3*(z2^2-7)*(27*z2^4-378*z2^2-8))", r)
    d1, d2 = p21.dual_basis(1)
    seconds = time.perf_counter() - t0
    record(2, {
        "result in order (z2,z1)": res21 == want,
        "result in order (z1,z2)": res12 == want,
        "det in order (z2,z1)": p21.connection_matrix(2).det == det21,
        "det in order (z1,z2)": p12.connection_matrix(2).det == det12,
        "printed dual d1": d1 == P(f"(1-3*g)*(1+3*g)/(2*g*{CUBIC})", r),
        "printed dual d2": d2 == P(f"3*(2-3*g)*(2+3*g)*z2/(2*g*{CUBIC}^2)", r),
    }, seconds, 30)


def test_criterion_3_third():
    t0 = time.perf_counter()
    prob = load_problem("third")
    plan = prob.plan()
    got = plan.intersection_number(prob.left, prob.right)
    seconds = time.perf_counter() - t0
    record(3, {
        "result": got == P("32/(1-16*e^2)", prob.registry),
        "derivative basis of four elements": len(plan.basis(2).elements) == 4,
    }, seconds, 60)


def test_criterion_4_higgs():
    t0 = time.perf_counter()
    prob = load_problem("higgs")
    plan = prob.plan()
    r = prob.registry
    c = reduction_coefficient(prob.coefficient, 0, plan)
    d = dual_element(plan, 0)
    seconds = time.perf_counter() - t0
    record(4, {
        "coefficient": c == P("(s+mt2-mw2)/2", r),
        "printed dual": d == P("2*(1+4*eps)*(3+4*eps)/((1+2*eps)*(s+mw2-mt2)^2)", r),
    }, seconds, 10)


def test_criterion_5_equal_mass(sunrise_unequal, sunrise_equal_rotated):
    prob = load_problem("sunrise_equal")
    raw = FibrationPlan(prob.twist, prob.order, check=False)
    degree = raw.connection_matrix(2).det_num.degree("z2")
    rep = run_job(parse_job(job_text("sunrise_equal")))
    rot = sunrise_equal_rotated["plan"]
    eq = sunrise_equal_rotated["A_x"]
    ne = sunrise_unequal["A_x"]
    r_ne = sunrise_unequal["plan"].registry
    one = {"y1": r_ne.one(), "y2": r_ne.one()}
    same = all(transfer(substitute(ne[i][j], one), rot.registry) == eq[i][j]
               for i in range(4) for j in range(4))
    with pytest.raises(DegenerateFibration):
        FibrationPlan(prob.twist, prob.order).connection_matrix(2)
    record(5, {
        "det numerator degree 3 without rotation": degree == 3,
        "exit 2 with DegenerateFibration": rep.exit_code == 2
        and rep.error_type == "DegenerateFibration",
        "rotated intersection matrix has rank 4": rank(rot.intersection_matrix(2)) == 4,
        "rotated block equals unequal block at y1=y2=1": same,
    })


def test_criterion_6_unequal_sunrise(sunrise_unequal):
    plan = sunrise_unequal["plan"]
    prob = sunrise_unequal["problem"]
    A_x = sunrise_unequal["A_x"]
    forms_ok = True
    try:
        from twistint.feynman import de_forms
        check_projection_against_oracle(plan, de_forms(plan, "x", prob.shift), A_x, 3, seed=11)
    except Exception:
        forms_ok = False
    A_y = de_matrix(plan, "y1", prob.registry.zero())
    flat = all(v.is_zero() for row in flatness_defect(A_x, A_y, "x", "y1") for v in row)
    record(6, {"oracle agreement at 3 samples": forms_ok, "flatness in (x, y1)": flat})


def test_criterion_7_properties():
    failed = {}
    for prop in test_properties.PROPERTIES:
        try:
            prop()
        except Exception as exc:
            failed[prop.__name__] = type(exc).__name__
    checks = {name: name not in failed for name in (p.__name__ for p in test_properties.PROPERTIES)}
    record(7, checks)


def test_criterion_8_oracle():
    checks = {}
    for name in ("univariate", "elliptic", "third"):
        prob = load_problem(name)
        plan = prob.plan()
        exact = plan.intersection_number(prob.left, prob.right)
        try:
            recs = check_against_oracle(plan, prob.left, prob.right, exact, 10, seed=8)
            checks[name] = len(recs) == 10 and all(x.rel_err < 1e-8 for x in recs)
        except Exception:
            checks[name] = False
    prob = load_problem("higgs")
    plan = prob.plan()
    row = [reduction_coefficient(prob.coefficient, 0, plan)]
    try:
        recs = check_projection_against_oracle(plan, [prob.coefficient], [row], 10, seed=8)
        checks["higgs"] = len(recs) == 10
    except Exception:
        checks["higgs"] = False
    record(8, checks)
