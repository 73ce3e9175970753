"""Small exact linear algebra over any field of :mod:`affmod.fields`.

Rows are sparse dictionaries ``column -> value`` so that the large, mostly
empty systems coming from undetermined-coefficient problems stay cheap.
"""

from __future__ import annotations

from typing import Sequence

from .fields import QQ, Field


def solve_sparse(rows: Sequence[dict], rhs: Sequence[Sequence], ncols: int, field: Field = QQ):
    """Solve ``A X = B`` for ``X`` with one column per right-hand side.

    ``rows[r]`` is row ``r`` of ``A`` as a sparse dict and ``rhs[r]`` the
    matching row of ``B``.  Returns a list of solution vectors (one per
    right-hand side, free variables set to zero) or ``None`` when the
    system is inconsistent.
    """
    nrhs = len(rhs[0]) if rhs else 0
    work = []
    for r, row in enumerate(rows):
        d = {c: v for c, v in row.items() if v}
        for j in range(nrhs):
            v = rhs[r][j]
            if v:
                d[ncols + j] = v
        if d:
            work.append(d)
    pivots = {}  # column -> row dict (normalized, pivot value 1)
    for row in work:
        # reduce by existing pivots until a new pivot column appears
        while True:
            cols = [c for c in row if c < ncols]
            if not cols:
                break
            col = min(cols)
            piv = pivots.get(col)
            if piv is None:
                break
            factor = row[col]
            for c, v in piv.items():
                nv = row.get(c, field.zero) - factor * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            row.pop(col, None)
        cols = [c for c in row if c < ncols]
        if not cols:
            if row:
                return None
            continue
        col = min(cols)
        inv = field.one / row[col]
        row = {c: v * inv for c, v in row.items()}
        row[col] = field.one
        pivots[col] = row
    # back substitution in decreasing pivot order
    solution = [[field.zero] * ncols for _ in range(nrhs)]
    for col in sorted(pivots, reverse=True):
        row = pivots[col]
        for j in range(nrhs):
            val = row.get(ncols + j, field.zero)
            for c, v in row.items():
                if c != col and c < ncols:
                    val = val - v * solution[j][c]
            solution[j][col] = val
    return solution


def mat_mul(a, b, field: Field = QQ):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(m)), field.zero) for j in range(p)] for i in range(n)]


def identity(n: int, field: Field = QQ):
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


def det(m, field: Field = QQ):
    """Determinant by Gaussian elimination."""
    a = [[field(v) for v in row] for row in m]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant of a non-square matrix")
    d = field.one
    for c in range(n):
        r = next((r for r in range(c, n) if a[r][c]), None)
        if r is None:
            return field.zero
        if r != c:
            a[c], a[r] = a[r], a[c]
            d = -d
        d = d * a[c][c]
        inv = field.one / a[c][c]
        for r2 in range(c + 1, n):
            f = a[r2][c] * inv
            if f:
                for k in range(c, n):
                    a[r2][k] = a[r2][k] - f * a[c][k]
    return d
