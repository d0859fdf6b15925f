"""Small exact linear algebra over ExactComplex (lists of lists)."""

from __future__ import annotations

import numpy as np

from .exactpoly import EC_ONE, EC_ZERO, ExactComplex


def mat_of(rows):
    return [[ExactComplex.of(x) for x in row] for row in rows]


def identity(n):
    return [[EC_ONE if i == j else EC_ZERO for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = EC_ZERO
            for t in range(k):
                s = s + a[i][t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def mat_vec(a, v):
    return [sum((a[i][t] * v[t] for t in range(len(v))), EC_ZERO) for i in range(len(a))]


def mat_eq(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def is_idempotent(a) -> bool:
    return mat_eq(mat_mul(a, a), a)


def rref(rows):
    """Reduced row echelon form; returns (rref_rows, pivot_columns)."""
    m = [[ExactComplex.of(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(m)):
            if not m[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = EC_ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[0])


def mat_inv(a):
    n = len(a)
    aug = [[ExactComplex.of(x) for x in row] + [EC_ONE if i == j else EC_ZERO for j in range(n)]
           for i, row in enumerate(a)]
    reduced, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(reduced) < n:
        raise ValueError("matrix is singular")
    return [row[n:] for row in reduced]


def solve(a, b):
    """Solve a x = b exactly (a square invertible)."""
    return mat_vec(mat_inv(a), b)


def to_complex_array(a) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in a], dtype=np.complex128)


def from_complex_array(a) -> list:
    return [[ExactComplex.of(complex(x)) for x in row] for row in np.asarray(a)]
