import json

import pytest

from conftest import job_text
from twistint.cli import (
    Job, RunFlags, exit_code_for, main, parse_job, resolve, run_job, validate_report,
)
from twistint.errors import (
    DegenerateFibration, NonGenericExponent, OracleError, ParseError, SingularSystem,
    UndeclaredName,
)
from twistint.parsing import parse_ratfunc

MINIMAL = "vars z\nparams g\ntwist z^g\nleft 1/z\nright 1\norder z\n"
JOBS = ["univariate", "elliptic", "third", "higgs", "sunrise_equal", "sunrise_equal_rotated",
        "sunrise_unequal"]


def test_minimal_job_parses():
    job = parse_job(MINIMAL)
    assert job.vars == ["z"] and job.params == ["g"] and job.order == ["z"]
    assert job.task == "intersection"
    rep = run_job(job)
    assert rep.exit_code == 0
    # u = z^g on P^1: only z = 0 and infinity, so <dz/z|1> = 1/g + 1/(-g)
    assert rep.result == "0"


def test_double_caret_points_at_second_caret():
    with pytest.raises(ParseError) as info:
        parse_job("vars z\nparams g\ntwist z^^g\nleft 1\nright 1\n")
    assert (info.value.line, info.value.col) == (3, 9)


def test_undeclared_name():
    with pytest.raises(UndeclaredName):
        resolve(parse_job("vars z\nparams g\ntwist z^g\nleft 1/w\nright 1\n"))


def test_order_must_be_permutation():
    with pytest.raises(ParseError):
        resolve(parse_job("vars z1 z2\nparams g\ntwist z1^g\ntwist z2^g\nleft 1\nright 1\n"
                          "order z1 z1\n"))


def test_comments_and_blank_lines():
    text = "# header\n\n" + MINIMAL.replace("left 1/z", "left 1/z   # trailing")
    assert parse_job(text) == parse_job(MINIMAL)


@pytest.mark.parametrize("name", JOBS)
def test_round_trip(name):
    job = parse_job(job_text(name))
    again = parse_job(job.to_text())
    assert again == job
    assert again.to_text() == job.to_text()


def test_elliptic_job_inputs():
    prob = resolve(parse_job(job_text("elliptic")))
    r = prob.registry
    bases = [str(p) for p, _ in prob.twist.factors]
    assert bases == ["z1", "z2", str(parse_ratfunc("z2^2-4*z1^3+11*z1-7", r))]
    assert all(str(g) == "g" for _, g in prob.twist.factors)
    assert prob.order == ("z2", "z1")


def test_golden_jobs():
    rep = run_job(parse_job(job_text("univariate")))
    r = resolve(parse_job(job_text("univariate"))).registry
    assert parse_ratfunc(rep.result, r) == parse_ratfunc("6*g/((1-g)*(1-7*g))", r)
    rep = run_job(parse_job(job_text("third")))
    r = resolve(parse_job(job_text("third"))).registry
    assert parse_ratfunc(rep.result, r) == parse_ratfunc("32/(1-16*e^2)", r)


def test_json_report_validates_and_reparses(capsys, tmp_path):
    path = tmp_path / "u.job"
    path.write_text(job_text("univariate"))
    code = main(["--job", str(path), "--json", "--oracle", "2", "--seed", "5"])
    assert code == 0
    d = json.loads(capsys.readouterr().out)
    validate_report(d)
    assert d["order"] == ["z1"] and d["dims"] == [1, 6]
    assert len(d["oracle"]) == 2 and all(o["rel_err"] < 1e-8 for o in d["oracle"])
    r = resolve(parse_job(job_text("univariate"))).registry
    f = parse_ratfunc(d["result"], r)
    assert str(f) == d["result"]


def test_equal_mass_sunrise_exit_code(capsys, tmp_path):
    path = tmp_path / "s.job"
    path.write_text(job_text("sunrise_equal"))
    assert main([str(path)]) == 2
    err = capsys.readouterr().err
    assert "DegenerateFibration" in err and "rotate z1 z2 1 2" in err


def test_equal_mass_report():
    rep = run_job(parse_job(job_text("sunrise_equal")))
    assert rep.exit_code == 2 and rep.error_type == "DegenerateFibration"
    assert rep.suggestion == "rotate z1 z2 1 2"
    validate_report(rep.as_dict())


def test_exit_codes():
    assert exit_code_for(DegenerateFibration("x")) == 2
    assert exit_code_for(NonGenericExponent("x")) == 2
    assert exit_code_for(SingularSystem("x")) == 3
    assert exit_code_for(OracleError("x")) == 4
    assert exit_code_for(ParseError("x")) == 1


def test_integer_exponent_is_an_assumption_failure(capsys, tmp_path):
    # an integer exponent breaks the genericity assumption on the twist itself
    path = tmp_path / "int.job"
    path.write_text("vars z\nparams g\ntwist z^2\nleft 1\nright 1\n")
    assert main([str(path)]) == 2
    assert "NonGenericExponent" in capsys.readouterr().err


def test_dependent_basis_gives_exit_3():
    job = parse_job(job_text("elliptic") + "basis 1: 1, 2\n")
    rep = run_job(job)
    assert rep.exit_code == 3 and rep.error_type == "GenericityError"


def test_parse_error_exit(capsys, tmp_path):
    path = tmp_path / "bad.job"
    path.write_text("vars z\nparams g\ntwist z^^g\n")
    assert main([str(path)]) == 1
    assert "line 3, column 9" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["/nonexistent/job"]) == 1


def test_verbose_trace(capsys, tmp_path):
    path = tmp_path / "e.job"
    path.write_text(job_text("elliptic"))
    trace = tmp_path / "t.jsonl"
    assert main([str(path), "--verbose", "--trace", str(trace)]) == 0
    captured = capsys.readouterr()
    assert captured.out.strip() == "-1/4/(11*g^2-g)"
    assert "level 1 (z2)" in captured.err and "level 2 (z1)" in captured.err
    recs = [json.loads(x) for x in trace.read_text().splitlines()]
    assert recs[0]["level"] == 1


def test_order_override():
    job = parse_job(job_text("elliptic"))
    a = run_job(job)
    b = run_job(job, RunFlags(order=["z1", "z2"]))
    assert a.result == b.result and b.order == ["z1", "z2"]
    assert a.dims == [1, 2, 6] and b.dims == [1, 3, 6]


def test_check_assumptions_only():
    rep = run_job(parse_job(job_text("elliptic")), RunFlags(check_assumptions=True))
    assert rep.exit_code == 0 and rep.result is None and rep.dims == [1, 2, 6]


def test_job_dataclass_defaults():
    assert Job().task == "intersection" and not Job().feynman
