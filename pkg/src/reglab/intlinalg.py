"""Small exact integer linear algebra: Smith normal form with transforms."""

from __future__ import annotations


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(matrix):
    """Return ``(S, P, Q)`` with ``P @ M @ Q == S`` diagonal, ``P``, ``Q`` unimodular.

    Diagonal entries are non-negative and each divides the next. ``matrix`` is a
    list of integer rows (may be rectangular).
    """
    m = [list(map(int, row)) for row in matrix]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    P = _identity(rows)
    Q = _identity(cols)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for r in m:
            r[i], r[j] = r[j], r[i]
        for r in Q:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, k):  # row dst += k * row src
        m[dst] = [a + k * b for a, b in zip(m[dst], m[src])]
        P[dst] = [a + k * b for a, b in zip(P[dst], P[src])]

    def add_col(src, dst, k):
        for r in m:
            r[dst] += k * r[src]
        for r in Q:
            r[dst] += k * r[src]

    def neg_row(i):
        m[i] = [-a for a in m[i]]
        P[i] = [-a for a in P[i]]

    t = 0
    while t < min(rows, cols):
        nonzero = [(abs(m[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if m[i][j]]
        if not nonzero:
            break
        _, i, j = min(nonzero)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, rows):
                if m[i][t]:
                    add_row(t, i, -(m[i][t] // m[t][t]))
                    if m[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if m[t][j]:
                    add_col(t, j, -(m[t][j] // m[t][t]))
                    if m[t][j]:
                        done = False
            if done:
                bad = [(i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                       if m[i][j] % m[t][t]]
                if not bad:
                    break
                add_row(bad[0][0], t, 1)
                done = False
            if not done:
                nonzero = [(abs(m[i][j]), i, j) for i in range(t, rows) for j in range(t, cols)
                           if m[i][j] and (i == t or j == t)]
                _, i, j = min(nonzero)
                swap_rows(t, i)
                swap_cols(t, j)
        if m[t][t] < 0:
            neg_row(t)
        t += 1
    return m, P, Q


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def inverse2(m):
    """Inverse of a unimodular 2x2 integer matrix."""
    d = det2(m)
    if d not in (1, -1):
        raise ValueError("matrix is not unimodular")
    return [[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]]
