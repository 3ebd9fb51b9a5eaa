"""Job files in, exact intersection numbers out.

A job file is line oriented; ``#`` starts a comment.  Plain jobs declare
``vars``, ``params``, one ``twist (base)^(exponent)`` line per factor and
either ``left``/``right`` forms, ``coefficient <expr>`` or ``dematrix <param>``.
Feynman jobs replace ``vars``/``twist`` by ``loops``, ``dot``, ``prop``,
``cut`` and ``auxexp``; their expressions may use ``B`` (the Baikov
polynomial on the cut) and ``dB_<prop>`` (its derivative, taken before
cutting).  Exit codes: 0 success, 1 input error, 2 assumption failure,
3 genericity failure, 4 oracle failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .algebra import RatFunc, VarRegistry, substitute
from .cohomology import Twist, rotate_coordinates, rotation_bindings
from .errors import (
    AlgebraError, AssumptionError, DegenerateFibration, GenericityError, OracleError,
    ParseError, TwistIntError, UndeclaredName,
)
from .feynman import (
    BaikovSetup, baikov_polynomial, cut_registry, de_forms, de_matrix, derivative_basis,
    maximal_cut_twist, on_cut, prefactor_shift, project_on_duals,
)
from .intersect import FibrationPlan
from .oracle import check_against_oracle, check_projection_against_oracle
from .parsing import parse_power, parse_ratfunc

EXIT_OK, EXIT_INPUT, EXIT_ASSUMPTION, EXIT_GENERICITY, EXIT_ORACLE = 0, 1, 2, 3, 4

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_RESERVED = {"B"}


# -- the job ----------------------------------------------------------------------

@dataclass
class Job:
    vars: list = field(default_factory=list)
    params: list = field(default_factory=list)
    twist: list = field(default_factory=list)        # factor texts "(base)^(exp)"
    left: str | None = None
    right: str | None = None
    order: list | None = None
    bases: dict = field(default_factory=dict)        # level -> [expr text]
    duals: dict = field(default_factory=dict)
    rotate: tuple | None = None                      # (i, j, c, s)
    loops: list = field(default_factory=list)
    dots: list = field(default_factory=list)         # (a, b, expr text)
    props: list = field(default_factory=list)        # (name, expr text)
    cut: list = field(default_factory=list)
    auxexp: str | None = None
    prefactor: list = field(default_factory=list)    # (param, exponent text)
    coefficient: str | None = None
    dematrix: str | None = None
    # (keyword, index) -> (line, column offset); diagnostics only
    where: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def feynman(self) -> bool:
        return bool(self.props)

    @property
    def task(self) -> str:
        if self.dematrix is not None:
            return "dematrix"
        if self.coefficient is not None:
            return "coefficient"
        return "intersection"

    def externals(self) -> list:
        out = []
        for a, b, _ in self.dots:
            for m in (a, b):
                if m not in self.loops and m not in out:
                    out.append(m)
        return out

    def to_text(self) -> str:
        """Serialize; parse_job(job.to_text()) == job."""
        lines = []
        if self.vars:
            lines.append("vars " + " ".join(self.vars))
        if self.params:
            lines.append("params " + " ".join(self.params))
        if self.loops:
            lines.append("loops " + " ".join(self.loops))
        for a, b, e in self.dots:
            lines.append(f"dot {a} {b} = {e}")
        for name, e in self.props:
            lines.append(f"prop {name} = {e}")
        if self.cut:
            lines.append("cut " + " ".join(self.cut))
        if self.auxexp is not None:
            lines.append(f"auxexp {self.auxexp}")
        for p, e in self.prefactor:
            lines.append(f"prefactor {p} {e}")
        lines += [f"twist {t}" for t in self.twist]
        if self.left is not None:
            lines.append(f"left {self.left}")
        if self.right is not None:
            lines.append(f"right {self.right}")
        if self.coefficient is not None:
            lines.append(f"coefficient {self.coefficient}")
        if self.dematrix is not None:
            lines.append(f"dematrix {self.dematrix}")
        if self.order is not None:
            lines.append("order " + " ".join(self.order))
        for lvl in sorted(self.bases):
            lines.append(f"basis {lvl}: " + ", ".join(self.bases[lvl]))
        for lvl in sorted(self.duals):
            lines.append(f"dualcand {lvl}: " + ", ".join(self.duals[lvl]))
        if self.rotate is not None:
            lines.append("rotate " + " ".join(str(x) for x in self.rotate))
        return "\n".join(lines) + "\n"


def _names(rest: str, lineno: int, col0: int) -> list:
    out = []
    for m in re.finditer(r"\S+", rest):
        if not _NAME.match(m.group()):
            raise ParseError(f"invalid name {m.group()!r}", lineno, col0 + m.start() + 1)
        out.append(m.group())
    return out


def _split_exprs(rest: str, col0: int) -> list:
    """Comma-separated expressions with their column offsets."""
    out, start = [], 0
    for piece in rest.split(","):
        lead = len(piece) - len(piece.lstrip())
        out.append((piece.strip(), col0 + start + lead))
        start += len(piece) + 1
    return out


def _level_list(rest: str, lineno: int, col0: int):
    m = re.match(r"\s*(\d+)\s*:", rest)
    if not m:
        raise ParseError("expected '<level>:'", lineno, col0 + 1)
    items = _split_exprs(rest[m.end():], col0 + m.end())
    for text, c in items:
        if not text:
            raise ParseError("empty expression in list", lineno, c + 1)
    return int(m.group(1)), items


def parse_job(text: str) -> Job:
    """Parse and validate a job file; errors carry line and column."""
    job = Job()
    seen = set()
    once = {"vars", "params", "left", "right", "order", "loops", "cut", "auxexp",
            "coefficient", "dematrix", "rotate"}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = re.match(r"\s*(\S+)", line)
        kw = m.group(1)
        col0 = m.end()
        rest = line[col0:]
        body = rest.strip()
        bcol = col0 + (len(rest) - len(rest.lstrip()))
        if kw in once and kw in seen:
            raise ParseError(f"duplicate '{kw}' line", lineno, m.start(1) + 1)
        seen.add(kw)
        if kw in ("vars", "params", "order", "loops", "cut"):
            setattr(job, kw, _names(rest, lineno, col0))
            job.where[(kw, 0)] = (lineno, bcol)
        elif kw == "twist":
            job.where[("twist", len(job.twist))] = (lineno, bcol)
            job.twist.append(body)
        elif kw in ("left", "right", "coefficient", "auxexp"):
            if not body:
                raise ParseError(f"'{kw}' needs an expression", lineno, col0 + 1)
            job.where[(kw, 0)] = (lineno, bcol)
            setattr(job, kw, body)
        elif kw == "dematrix":
            names = _names(rest, lineno, col0)
            if len(names) != 1:
                raise ParseError("'dematrix' takes one parameter name", lineno, col0 + 1)
            job.dematrix = names[0]
            job.where[("dematrix", 0)] = (lineno, bcol)
        elif kw in ("basis", "dualcand"):
            lvl, items = _level_list(rest, lineno, col0)
            target = job.bases if kw == "basis" else job.duals
            if lvl in target:
                raise ParseError(f"duplicate '{kw} {lvl}' line", lineno, m.start(1) + 1)
            target[lvl] = [t for t, _ in items]
            for k, (_, c) in enumerate(items):
                job.where[(kw, lvl, k)] = (lineno, c)
        elif kw == "dot":
            mm = re.match(r"\s*(\S+)\s+(\S+)\s*=(.*)$", rest)
            if not mm or not mm.group(3).strip():
                raise ParseError("expected 'dot <a> <b> = <expr>'", lineno, col0 + 1)
            a, b, e = mm.group(1), mm.group(2), mm.group(3).strip()
            job.where[("dot", a, b)] = (lineno, col0 + mm.start(3) + len(mm.group(3)) - len(mm.group(3).lstrip()))
            job.dots.append((a, b, e))
        elif kw == "prop":
            mm = re.match(r"\s*(\S+)\s*=(.*)$", rest)
            if not mm or not mm.group(2).strip():
                raise ParseError("expected 'prop <name> = <expr>'", lineno, col0 + 1)
            name, e = mm.group(1), mm.group(2).strip()
            if not _NAME.match(name):
                raise ParseError(f"invalid propagator name {name!r}", lineno, col0 + mm.start(1) + 1)
            job.where[("prop", name)] = (lineno, col0 + mm.start(2) + len(mm.group(2)) - len(mm.group(2).lstrip()))
            job.props.append((name, e))
        elif kw == "prefactor":
            mm = re.match(r"\s*(\S+)\s+(.+)$", rest)
            if not mm:
                raise ParseError("expected 'prefactor <param> <exponent>'", lineno, col0 + 1)
            job.where[("prefactor", mm.group(1))] = (lineno, col0 + mm.start(2))
            job.prefactor.append((mm.group(1), mm.group(2).strip()))
        elif kw == "rotate":
            parts = rest.split()
            if len(parts) != 4:
                raise ParseError("expected 'rotate <zi> <zj> <c> <s>'", lineno, col0 + 1)
            try:
                c, s = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("rotation constants must be integers", lineno, col0 + 1) from None
            job.rotate = (parts[0], parts[1], c, s)
            job.where[("rotate", 0)] = (lineno, col0)
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno, m.start(1) + 1)
    resolve(job)
    return job


# -- resolution into exact objects ---------------------------------------------------

@dataclass
class Problem:
    job: Job
    registry: VarRegistry
    twist: Twist
    order: tuple
    bases: dict
    duals: dict
    left: RatFunc | None
    right: RatFunc | None
    coefficient: RatFunc | None
    shift: RatFunc | None            # prefactor shift for the dematrix parameter
    default_top: list | None = None  # derivative basis offered for Feynman jobs

    def plan(self, order=None) -> FibrationPlan:
        order = tuple(order) if order else self.order
        bases = dict(self.bases)
        n = len(order)
        if n and n not in bases and self.default_top is not None:
            probe = FibrationPlan(self.twist, order, check=False)
            if probe.nu(n) == len(self.default_top):
                bases[n] = self.default_top
        return FibrationPlan(self.twist, order, bases, self.duals)


def _at(job: Job, key) -> tuple:
    return job.where.get(key, (None, 0))


def _check_names(job: Job) -> None:
    declared = set()
    for name in list(job.vars) + list(job.params):
        if name in declared:
            raise ParseError(f"{name!r} declared twice")
        if name in _RESERVED:
            raise ParseError(f"{name!r} is reserved for the Baikov polynomial")
        declared.add(name)


def resolve(job: Job) -> Problem:
    """Build the registry, twist and forms of a job; raises ParseError or UndeclaredName."""
    _check_names(job)
    if job.feynman:
        reg, twist, extra, setup, cut_info = _resolve_feynman(job)
    else:
        if not job.vars:
            raise ParseError("no 'vars' line")
        reg = VarRegistry(job.vars, job.params)
        extra = {}
        twist = _parse_twist(job, reg, extra)
        setup = cut_info = None
    zs = list(reg.z_vars)
    order = tuple(job.order) if job.order is not None else tuple(zs)
    if sorted(order) != sorted(zs):
        raise ParseError(f"order {' '.join(order)} is not a permutation of {' '.join(zs)}",
                         *_at(job, ("order", 0)))
    n = len(zs)

    def expr(key, text):
        return parse_ratfunc(text, reg, extra, *_at(job, key))

    left = expr(("left", 0), job.left) if job.left is not None else None
    right = expr(("right", 0), job.right) if job.right is not None else None
    coef = expr(("coefficient", 0), job.coefficient) if job.coefficient is not None else None
    bases, duals = {}, {}
    for kw, src, dst in (("basis", job.bases, bases), ("dualcand", job.duals, duals)):
        for lvl, items in src.items():
            if not 1 <= lvl <= n:
                raise ParseError(f"{kw} level {lvl} outside 1..{n}", *_at(job, (kw, lvl, 0)))
            dst[lvl] = [expr((kw, lvl, k), t) for k, t in enumerate(items)]
    for lvl in duals:
        if lvl in bases and len(bases[lvl]) != len(duals[lvl]):
            raise ParseError(f"level {lvl}: {len(bases[lvl])} basis elements but "
                             f"{len(duals[lvl])} candidate duals", *_at(job, ("dualcand", lvl, 0)))
    _check_task(job, reg)
    shift = None
    if job.dematrix is not None:
        shift = (prefactor_shift(setup.prefactor, job.dematrix, reg) if setup is not None
                 else reg.zero())
    default_top = None
    if cut_info is not None and n not in bases:
        default_top = cut_info
    prob = Problem(job, reg, twist, order, bases, duals, left, right, coef, shift, default_top)
    if job.rotate is not None:
        prob = _rotate(prob)
    return prob


def _check_task(job: Job, reg: VarRegistry) -> None:
    tasks = [job.dematrix is not None, job.coefficient is not None,
             job.left is not None or job.right is not None]
    if sum(tasks) != 1:
        raise ParseError("a job needs exactly one task: left/right, coefficient or dematrix")
    if tasks[2] and (job.left is None or job.right is None):
        raise ParseError("'left' and 'right' must both be given")
    if job.dematrix is not None and job.dematrix not in reg.params:
        raise UndeclaredName(f"dematrix parameter {job.dematrix!r} is not declared")


def _parse_twist(job: Job, reg: VarRegistry, extra: dict) -> Twist:
    if not job.twist:
        raise ParseError("no 'twist' line")
    factors = []
    for k, text in enumerate(job.twist):
        line, col0 = _at(job, ("twist", k))
        base, exponent = parse_power(text, reg, extra, line, col0)
        if not base.is_polynomial():
            raise ParseError("twist base must be a polynomial", line, col0 + 1)
        if any(exponent.depends_on(z) for z in reg.z_vars):
            raise ParseError("twist exponent must not depend on integration variables",
                             line, col0 + 1)
        factors.append((base.num, exponent))
    try:
        return Twist(reg, tuple(factors))
    except AlgebraError as exc:
        raise ParseError(str(exc), *_at(job, ("twist", 0))) from exc


def _resolve_feynman(job: Job):
    if not job.loops:
        raise ParseError("a Feynman job needs a 'loops' line")
    params = list(job.params)
    dots = {}
    where = {}
    for a, b, e in job.dots:
        dots[(a, b)] = e
        where[(a, b)] = job.where.get(("dot", a, b), (None, 0))
    for name, _ in job.props:
        where[name] = job.where.get(("prop", name), (None, 0))
    prefactor = {}
    for p, e in job.prefactor:
        if p not in params:
            raise UndeclaredName(f"prefactor parameter {p!r} is not declared")
        prefactor[p] = e
    try:
        setup = BaikovSetup.build(job.loops, job.externals(), params, dots, job.props,
                                  prefactor, where)
    except (ParseError, UndeclaredName):
        raise
    except AlgebraError as exc:
        raise ParseError(str(exc)) from exc
    for z in job.cut:
        if z not in setup.registry.z_vars:
            raise UndeclaredName(f"cut variable {z!r} is not a propagator")
    B = baikov_polynomial(setup)
    creg = cut_registry(setup, job.cut)
    if job.vars and sorted(job.vars) != sorted(creg.z_vars):
        raise ParseError(f"vars {' '.join(job.vars)} do not match the uncut propagators "
                         f"{' '.join(creg.z_vars)}")
    Bc = on_cut(B, setup, job.cut, creg)
    extra = {"B": Bc}
    for z in setup.registry.z_vars:
        extra[f"dB_{z}"] = on_cut(RatFunc.from_poly(B).derivative(z), setup, job.cut, creg)
    if job.twist:
        twist = _parse_twist(job, creg, extra)
    else:
        if job.auxexp is None:
            raise ParseError("a Feynman job needs 'auxexp' or explicit 'twist' lines")
        a = parse_ratfunc(job.auxexp, creg, None, *_at(job, ("auxexp", 0)))
        if any(a.depends_on(z) for z in creg.z_vars):
            raise ParseError("auxexp must not depend on integration variables",
                             *_at(job, ("auxexp", 0)))
        twist = maximal_cut_twist(Bc, a)
    default_top = None
    if job.auxexp is not None:
        a_full = parse_ratfunc(job.auxexp, setup.registry, None, *_at(job, ("auxexp", 0)))
        default_top = derivative_basis(B, a_full, setup, job.cut, creg)
    return creg, twist, extra, setup, default_top


def _rotate(prob: Problem) -> Problem:
    """Work in rotated coordinates.

    Physical forms (left, right, coefficient target, top-level basis and
    candidate duals) are pulled back including the constant Jacobian;
    lower-level bases are taken as written in the rotated coordinates.
    """
    i, j, c, s = prob.job.rotate
    reg = prob.registry
    for v in (i, j):
        if v not in reg.z_vars:
            raise UndeclaredName(f"rotation variable {v!r} is not an integration variable")
    if i == j:
        raise ParseError("rotation needs two distinct variables", *_at(prob.job, ("rotate", 0)))
    if c == 0 and s == 0:
        raise ParseError("rotation with c = s = 0 is not invertible", *_at(prob.job, ("rotate", 0)))
    b = rotation_bindings(reg, i, j, c, s)
    jac = reg.const(Fraction(c * c + s * s))

    def move(f):
        return None if f is None else substitute(f, b) * jac

    n = len(reg.z_vars)
    bases = dict(prob.bases)
    duals = dict(prob.duals)
    if n in bases:
        bases[n] = [move(f) for f in bases[n]]
    if n in duals:
        duals[n] = [move(f) for f in duals[n]]
    default_top = [move(f) for f in prob.default_top] if prob.default_top else None
    return Problem(prob.job, reg, rotate_coordinates(prob.twist, i, j, c, s), prob.order,
                   bases, duals, move(prob.left), move(prob.right), move(prob.coefficient),
                   prob.shift, default_top)


# -- running ---------------------------------------------------------------------------

@dataclass
class RunFlags:
    order: list | None = None
    check_assumptions: bool = False
    oracle: int = 0
    seed: int = 0
    verbose: bool = False
    trace: str | None = None
    n_points: int = 64
    tolerance: float = 1e-8


@dataclass
class Report:
    task: str = "intersection"
    result: object = None
    order: list = field(default_factory=list)
    dims: list = field(default_factory=list)
    reductions: list = field(default_factory=list)
    oracle: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    exit_code: int = EXIT_OK
    error: str | None = None
    error_type: str | None = None
    suggestion: str | None = None
    seconds: float = 0.0

    def as_dict(self) -> dict:
        d = {"task": self.task, "result": self.result, "order": self.order, "dims": self.dims,
             "reductions": self.reductions, "oracle": self.oracle, "trace": self.trace,
             "exit_code": self.exit_code, "seconds": self.seconds}
        if self.error is not None:
            d["error"] = {"type": self.error_type, "message": self.error,
                          "suggestion": self.suggestion}
        return d


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, AssumptionError):
        return EXIT_ASSUMPTION
    if isinstance(exc, GenericityError):
        return EXIT_GENERICITY
    if isinstance(exc, OracleError):
        return EXIT_ORACLE
    return EXIT_INPUT


def _level_trace(plan: FibrationPlan) -> list:
    out = []
    for rec in plan.trace:
        r = dict(rec)
        r["reductions"] = plan.reductions[rec["level"]]
        out.append(r)
    if plan.reduced_log:
        out.append({"level": plan.n, "reduced": plan.reduced_log[-1]})
    return out


def run_job(job: Job, flags: RunFlags | None = None) -> Report:
    """Run one job; every failure is folded into the report's exit code."""
    flags = flags or RunFlags()
    rep = Report(task=job.task)
    t0 = time.perf_counter()
    plan = None
    try:
        prob = resolve(job)
        plan = prob.plan(flags.order)
        rep.order = list(plan.order)
        if flags.check_assumptions:
            for lvl in range(1, plan.n + 1):
                plan.connection_matrix(lvl)
        else:
            _compute(prob, plan, rep, flags)
        rep.dims = [plan.nu(i) for i in range(plan.n + 1)]
    except TwistIntError as exc:
        rep.exit_code = exit_code_for(exc)
        rep.error = str(exc)
        rep.error_type = type(exc).__name__
        if isinstance(exc, DegenerateFibration):
            rep.suggestion = exc.suggestion
    if plan is not None:
        rep.reductions = list(plan.reductions[1:])
        rep.trace = _level_trace(plan)
    rep.seconds = round(time.perf_counter() - t0, 3)
    return rep


def _compute(prob: Problem, plan: FibrationPlan, rep: Report, flags: RunFlags) -> None:
    job = prob.job
    if job.task == "intersection":
        value = plan.intersection_number(prob.left, prob.right)
        rep.result = str(value)
        if flags.oracle:
            recs = check_against_oracle(plan, prob.left, prob.right, value, flags.oracle,
                                        flags.seed, flags.tolerance, flags.n_points)
            rep.oracle = [r.as_dict() for r in recs]
    elif job.task == "coefficient":
        row = project_on_duals(plan, prob.coefficient)
        rep.result = [str(v) for v in row]
        if flags.oracle:
            recs = check_projection_against_oracle(plan, [prob.coefficient], [row], flags.oracle,
                                                   flags.seed, flags.tolerance, flags.n_points)
            rep.oracle = [r.as_dict() for r in recs]
    else:
        A = de_matrix(plan, job.dematrix, prob.shift)
        rep.result = [[str(v) for v in row] for row in A]
        if flags.oracle:
            forms = de_forms(plan, job.dematrix, prob.shift)
            recs = check_projection_against_oracle(plan, forms, A, flags.oracle, flags.seed,
                                                   flags.tolerance, flags.n_points)
            rep.oracle = [r.as_dict() for r in recs]


# -- output -----------------------------------------------------------------------------

def report_schema() -> dict:
    with resources.files("twistint").joinpath("report_schema.json").open() as fh:
        return json.load(fh)


def validate_report(d: dict) -> None:
    import jsonschema
    jsonschema.validate(d, report_schema())


def format_result(rep: Report) -> str:
    if rep.result is None:
        return ""
    if rep.task == "intersection":
        return rep.result
    if rep.task == "coefficient":
        return "\n".join(f"c{j + 1} = {v}" for j, v in enumerate(rep.result))
    return "\n".join(f"A[{i + 1}][{j + 1}] = {v}"
                     for i, row in enumerate(rep.result) for j, v in enumerate(row))


def format_trace(rep: Report) -> list:
    lines = []
    for rec in rep.trace:
        if "reduced" in rec:
            red = rec["reduced"]
            lines.append(f"reduced left:  [{', '.join(red['left'])}]")
            lines.append(f"reduced right: [{', '.join(red['right'])}]")
            continue
        lines.append(
            f"level {rec['level']} ({rec['var']}): nu_prev={rec['nu_prev']} "
            f"det degrees {rec['det_num_degree']}/{rec['det_den_degree']}"
            + (f" nu={rec['nu']}" if "nu" in rec else "")
            + f" reduction passes={rec['reductions']}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistint",
                                 description="Exact intersection numbers of twisted cocycles.")
    ap.add_argument("file", nargs="?", help="job file (same as --job)")
    ap.add_argument("--job", help="job file; '-' reads standard input")
    ap.add_argument("--order", nargs="+", help="fibration order, overriding the job file")
    ap.add_argument("--check-assumptions", action="store_true",
                    help="only build the connection matrices and check the assumptions")
    ap.add_argument("--oracle", type=int, default=0, metavar="N",
                    help="confirm the result numerically at N random samples")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print a JSON report")
    ap.add_argument("--verbose", action="store_true", help="print the per-level trace")
    ap.add_argument("--trace", metavar="FILE", help="write the per-level trace as JSON lines")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    path = args.job or args.file
    if path is None:
        print("error: no job file given", file=sys.stderr)
        return EXIT_INPUT
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        job = parse_job(text)
    except TwistIntError as exc:
        rep = Report(exit_code=exit_code_for(exc), error=str(exc), error_type=type(exc).__name__)
        if args.json:
            print(json.dumps(rep.as_dict(), indent=2))
        else:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return rep.exit_code
    flags = RunFlags(order=args.order, check_assumptions=args.check_assumptions,
                     oracle=args.oracle, seed=args.seed, verbose=args.verbose, trace=args.trace)
    rep = run_job(job, flags)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for rec in rep.trace:
                fh.write(json.dumps(rec) + "\n")
    if args.json:
        d = rep.as_dict()
        validate_report(d)
        print(json.dumps(d, indent=2))
        return rep.exit_code
    if rep.exit_code == EXIT_OK:
        if args.check_assumptions:
            print(f"assumptions hold; dims {rep.dims}")
        else:
            print(format_result(rep))
        for rec in rep.oracle:
            sample = ", ".join(f"{k}={v}" for k, v in rec["sample"].items())
            print(f"oracle {sample}: rel err {rec['rel_err']:.3g}")
    else:
        print(f"error: {rep.error_type}: {rep.error}", file=sys.stderr)
        if rep.suggestion:
            print(f"suggestion: {rep.suggestion}", file=sys.stderr)
    if args.verbose:
        for line in format_trace(rep):
            print(line, file=sys.stderr)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
