"""Row reduction and kernels for small sparse systems.

Vectors are dicts ``column -> scalar``; columns are integers whose order is
the pivot order.  Exact arithmetic uses Fractions and sparse elimination;
float arithmetic uses mpf with partial pivoting and an explicit rank
tolerance.
"""
from __future__ import annotations

from fractions import Fraction

from mpmath import mpf


def rref_exact(rows) -> dict:
    """Reduced row echelon form of the span of ``rows`` over the rationals.

    Returns ``{pivot_column: row}`` with each row normalized to 1 at its
    pivot, zero at every other pivot column and zero left of its pivot.
    The result depends only on the row space.
    """
    work = []
    for row in rows:
        r = {c: Fraction(v) for c, v in row.items() if v != 0}
        if r:
            work.append(r)
    cols = sorted({c for r in work for c in r})
    pivots: dict = {}
    for col in cols:
        cand = [i for i, r in enumerate(work) if col in r]
        if not cand:
            continue
        i = min(cand, key=lambda j: len(work[j]))
        prow = work.pop(i)
        inv = 1 / prow[col]
        prow = {c: v * inv for c, v in prow.items()}
        for r in work + list(pivots.values()):
            v = r.get(col)
            if v:
                for c, pv in prow.items():
                    nv = r.get(c, 0) - v * pv
                    if nv:
                        r[c] = nv
                    else:
                        r.pop(c, None)
        work = [r for r in work if r]
        pivots[col] = prow
    return pivots


def rref_float(rows, ncols: int, tol) -> dict:
    """Float RREF with partial pivoting; entries below ``tol`` count as zero."""
    mat = [[mpf(row.get(c, 0)) for c in range(ncols)] for row in rows]
    pivots = []
    rank = 0
    for col in range(ncols):
        if rank == len(mat):
            break
        best = max(range(rank, len(mat)), key=lambda i: abs(mat[i][col]))
        if abs(mat[best][col]) <= tol:
            for i in range(rank, len(mat)):
                mat[i][col] = mpf(0)
            continue
        mat[rank], mat[best] = mat[best], mat[rank]
        piv = mat[rank]
        inv = 1 / piv[col]
        for j in range(col, ncols):
            piv[j] *= inv
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                f = mat[i][col]
                row = mat[i]
                for j in range(col, ncols):
                    row[j] -= f * piv[j]
        pivots.append(col)
        rank += 1
    out = {}
    for i, col in enumerate(pivots):
        out[col] = {c: v for c, v in enumerate(mat[i]) if abs(v) > tol or c == col}
    return out


def rref(rows, ncols: int, exact: bool, tol=None) -> dict:
    if exact:
        return rref_exact(rows)
    if tol is None:
        raise ValueError("float row reduction needs an explicit tolerance")
    return rref_float(rows, ncols, tol)


def kernel_from_rref(pivots: dict, ncols: int, exact: bool = True) -> list:
    """Kernel basis (one vector per free column) of a matrix given in RREF."""
    one = Fraction(1) if exact else mpf(1)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = {f: one}
        for p, row in pivots.items():
            val = row.get(f)
            if val:
                v[p] = -val
        basis.append(v)
    return basis


def nullspace(rows, ncols: int, exact: bool = True, tol=None) -> list:
    """Canonical kernel basis: the RREF of the kernel, as a list of vectors."""
    piv = rref(rows, ncols, exact, tol)
    ker = kernel_from_rref(piv, ncols, exact)
    if not ker:
        return []
    red = rref(ker, ncols, exact, tol)
    return list(red.values())


def matrix_norm(rows) -> mpf:
    return max((abs(mpf(v)) for row in rows for v in row.values()), default=mpf(0))
