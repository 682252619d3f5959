"""Exact Gaussian elimination over Q on lists of lists."""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

from .polycore import Q


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and the pivot columns."""
    m = [[Q(v) for v in row] for row in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of {v : rows·v = 0}, one vector per free column, in echelon form."""
    if not rows:
        return [[mpq(1) if i == j else mpq(0) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    # reduced echelon form makes the basis depend only on the kernel
    return rref(basis, ncols)[0] if basis else []


def det(m: Sequence[Sequence]):
    a = [[Q(v) for v in row] for row in m]
    n = len(a)
    d = mpq(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return mpq(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def solve(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list] | None:
    """A solution X of a·X = b (b given as columns stacked into a matrix), or None."""
    n = len(a)
    k = len(b[0]) if b else 0
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    ncols = len(a[0])
    red, pivots = rref(aug, ncols + k)
    if any(p >= ncols for p in pivots):
        return None
    x = [[mpq(0)] * k for _ in range(ncols)]
    for row, p in zip(red, pivots):
        x[p] = row[ncols:]
    return x


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), mpq(0)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*a)]
