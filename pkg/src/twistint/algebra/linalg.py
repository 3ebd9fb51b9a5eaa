"""Exact linear algebra over the rational function field.

Rows are cleared of denominators and eliminated fraction-free (Bareiss), so
every intermediate entry stays a polynomial and each division is exact.
"""
from __future__ import annotations

from typing import Sequence

from ..errors import SingularSystem
from .poly import RatFunc, VarRegistry


Matrix = list  # list of rows of RatFunc


def _registry(rows) -> VarRegistry:
    for row in rows:
        for x in row:
            return x.registry
    raise ValueError("empty matrix")


def _clear_rows(rows: Sequence[Sequence[RatFunc]], ctx):
    """Scale each row to polynomial entries; return raw rows and the row scale factors."""
    out, scales = [], []
    for row in rows:
        den = ctx.constant(1)
        for x in row:
            d = x._d
            if not d.is_one() and d != den:
                g = den.gcd(d)
                den = den * (d / g)
        out.append([x._n * (den / x._d) if not x._n.is_zero() else x._n for x in row])
        scales.append(den)
    return out, scales


def _bareiss(m, ncols_pivot: int, full_rank_required: bool):
    """In-place fraction-free elimination on the first ``ncols_pivot`` columns.

    Returns (pivot columns, sign of the row permutation).
    """
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    prev = None
    sign = 1
    pivots = []
    r = 0
    for c in range(ncols_pivot):
        if r >= nrows:
            break
        cand = [i for i in range(r, nrows) if not m[i][c].is_zero()]
        if not cand:
            if full_rank_required:
                raise SingularSystem("matrix is singular")
            continue
        p = min(cand, key=lambda i: len(m[i][c]))   # sparsest pivot limits swell
        if p != r:
            m[r], m[p] = m[p], m[r]
            sign = -sign
        piv = m[r][c]
        for i in range(r + 1, nrows):
            a = m[i][c]
            for j in range(c + 1, ncols):
                v = m[i][j] * piv - a * m[r][j]
                m[i][j] = v / prev if prev is not None and not v.is_zero() else v
            m[i][c] = a - a
        prev = piv
        pivots.append(c)
        r += 1
    return pivots, sign


def linear_solve_exact(A: Sequence[Sequence[RatFunc]], b) -> list:
    """Solve A x = b exactly.

    ``b`` is either a vector or a matrix (list of rows); the result has the
    same shape.  Raises SingularSystem if det A = 0.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("linear_solve_exact needs a square matrix")
    reg = _registry(A)
    matrix_rhs = bool(b) and isinstance(b[0], (list, tuple))
    rhs = [list(r) for r in b] if matrix_rhs else [[x] for x in b]
    k = len(rhs[0])
    aug = [list(A[i]) + [x if isinstance(x, RatFunc) else reg.const(x) for x in rhs[i]]
           for i in range(n)]
    m, _ = _clear_rows(aug, reg.ctx)
    _bareiss(m, n, full_rank_required=True)
    xs = [[None] * k for _ in range(n)]
    for col in range(k):
        for i in range(n - 1, -1, -1):
            acc = RatFunc(reg, m[i][n + col])
            for j in range(i + 1, n):
                if not m[i][j].is_zero():
                    acc = acc - RatFunc(reg, m[i][j]) * xs[j][col]
            xs[i][col] = acc / RatFunc(reg, m[i][i])
    return xs if matrix_rhs else [row[0] for row in xs]


def determinant(A: Sequence[Sequence[RatFunc]]) -> RatFunc:
    n = len(A)
    if n == 0:
        raise ValueError("determinant of an empty matrix")
    reg = _registry(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    m, scales = _clear_rows(A, reg.ctx)
    try:
        _, sign = _bareiss(m, n, full_rank_required=True)
    except SingularSystem:
        return reg.zero()
    den = reg.ctx.constant(1)
    for s in scales:
        den = den * s
    return RatFunc(reg, m[n - 1][n - 1] * sign, den)


def rank(A: Sequence[Sequence[RatFunc]]) -> int:
    if not A:
        return 0
    reg = _registry(A)
    m, _ = _clear_rows(A, reg.ctx)
    pivots, _ = _bareiss(m, len(m[0]), full_rank_required=False)
    return len(pivots)


def nullspace(A) -> list:
    """Basis of {x : A x = 0} as a list of column vectors (reduced row echelon form)."""
    reg = _registry(A)
    rows = [list(r) for r in A]
    nrows, ncols = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if not rows[i][c].is_zero()), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [reg.zero()] * ncols
        v[fc] = reg.one()
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


def identity(reg: VarRegistry, n: int) -> list:
    return [[reg.one() if i == j else reg.zero() for j in range(n)] for i in range(n)]


def inverse(A) -> list:
    return linear_solve_exact(A, identity(_registry(A), len(A)))


def adjugate(A) -> tuple[RatFunc, list]:
    """Return (det A, adj A) with A * adj A = det A * identity."""
    d = determinant(A)
    if d.is_zero():
        raise SingularSystem("adjugate of a singular matrix is not computed")
    n = len(A)
    if n == 1:
        return d, [[_registry(A).one()]]
    if n == 2:
        return d, [[A[1][1], -A[0][1]], [-A[1][0], A[0][0]]]
    inv = inverse(A)
    return d, [[d * x for x in row] for row in inv]


def matmul(A, B) -> list:
    reg = _registry(A)
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = reg.zero()
            for t in range(k):
                if not A[i][t].is_zero() and not B[t][j].is_zero():
                    acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def transpose(A) -> list:
    return [list(r) for r in zip(*A)]
