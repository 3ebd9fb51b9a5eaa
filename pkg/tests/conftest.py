from __future__ import annotations

import time
from importlib import resources

import pytest

from twistint.algebra import VarRegistry
from twistint.cli import parse_job, resolve
from twistint.cohomology import Twist
from twistint.feynman import de_matrix
from twistint.parsing import parse_ratfunc

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def job_text(name: str) -> str:
    return resources.files("twistint").joinpath("jobs", f"{name}.job").read_text()


def load_problem(name: str, **replace):
    job = parse_job(job_text(name))
    for k, v in replace.items():
        setattr(job, k, v)
    return resolve(job)


def random_job(rng, n=None):
    """A small twist with generic exponents in g and two forms with poles on its divisor."""
    n = n or rng.choice([1, 1, 2])
    zs = ["z1", "z2"][:n]
    reg = VarRegistry(zs, ["g"])

    def lin():
        c = [rng.randint(-3, 3) for _ in zs]
        if not any(c):
            c[0] = 1
        return "+".join(f"({a})*{z}" for a, z in zip(c, zs)) + f"+({rng.randint(-3, 3)})"

    facs = [(z, f"{rng.randint(1, 3)}*g+{rng.choice(['1/3', '1/5', '2/7', '-1/4'])}") for z in zs]
    for _ in range(rng.randint(1, 2)):
        base = lin()
        if rng.random() < 0.4:
            base = f"({base})*({lin()})"
        facs.append((base, f"{rng.choice([1, -1, 2])}*g+{rng.choice(['1/2', '1/3', '3/5'])}"))
    tw = Twist(reg, tuple((parse_ratfunc(b, reg), parse_ratfunc(e, reg)) for b, e in facs))
    bases = [b for b, _ in facs]

    def form():
        num = rng.choice(["1", zs[0], zs[-1], f"{zs[0]}+2"])
        den = "*".join(f"({b})" for b in rng.sample(bases, rng.randint(1, min(2, len(bases)))))
        return parse_ratfunc(f"({num})/({den})", reg)

    return tw, form(), form()


def _sunrise(name: str) -> dict:
    t0 = time.perf_counter()
    prob = load_problem(name)
    plan = prob.plan()
    A = de_matrix(plan, "x", prob.shift)
    return {"problem": prob, "plan": plan, "A_x": A, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def sunrise_unequal():
    return _sunrise("sunrise_unequal")


@pytest.fixture(scope="session")
def sunrise_equal_rotated():
    return _sunrise("sunrise_equal_rotated")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
