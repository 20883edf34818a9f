"""Small exact matrix helpers over rational functions (lists of rows)."""

from __future__ import annotations

from .rational import RationalFunction


def zeros(n, rows, cols=None):
    cols = rows if cols is None else cols
    z = RationalFunction.zero(n)
    return [[z] * cols for _ in range(rows)]


def identity(n, size):
    m = zeros(n, size)
    one = RationalFunction.one(n)
    for i in range(size):
        m[i][i] = one
    return m


def transpose(a):
    return [list(col) for col in zip(*a)]


def matmul(a, b):
    n = a[0][0].n
    out = zeros(n, len(a), len(b[0]))
    for i, row in enumerate(a):
        for j in range(len(b[0])):
            acc = RationalFunction.zero(n)
            for k, aik in enumerate(row):
                if aik and b[k][j]:
                    acc = acc + aik * b[k][j]
            out[i][j] = acc
    return out


def det(a):
    """Determinant by fraction-free elimination with exact pivots."""
    size = len(a)
    m = [list(r) for r in a]
    n = m[0][0].n
    sign = 1
    result = RationalFunction.one(n)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col]), None)
        if pivot is None:
            return RationalFunction.zero(n)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        p = m[col][col]
        result = result * p
        for r in range(col + 1, size):
            if m[r][col]:
                factor = m[r][col] / p
                m[r] = [m[r][k] - factor * m[col][k] for k in range(size)]
    return result if sign > 0 else -result


def inverse(a):
    """Gauss-Jordan inverse; raises ZeroDivisionError if singular."""
    size = len(a)
    n = a[0][0].n
    m = [list(r) + row for r, row in zip(a, identity(n, size))]
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        m[col], m[pivot] = m[pivot], m[col]
        inv_p = m[col][col].inverse()
        m[col] = [v * inv_p for v in m[col]]
        for r in range(size):
            if r != col and m[r][col]:
                factor = m[r][col]
                m[r] = [m[r][k] - factor * m[col][k] for k in range(2 * size)]
    return [row[size:] for row in m]


def is_zero_matrix(a):
    return all(not v for row in a for v in row)
