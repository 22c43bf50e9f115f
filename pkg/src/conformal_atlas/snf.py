"""Smith normal form over the integers.

``smith_normal_form`` is the textbook dense reduction with exact Python ints.
``eliminate_unimodular`` is the sparse variant used on mesh boundary operators:
it only ever pivots on units, chooses pivots by Markowitz cost so that the
zero-fill pivots (rows or columns with a single entry) go first, and reports
which rows and columns were consumed.
"""
from __future__ import annotations

from collections import deque


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(A):
    """Return ``(D, L, R)`` with ``L @ A @ R == D`` and ``L, R`` unimodular.

    ``A`` is any nested sequence of ints.  ``D`` is diagonal with nonnegative
    entries, each dividing the next.
    """
    D = [[int(x) for x in row] for row in A]
    m = len(D)
    n = len(D[0]) if m else 0
    L = _identity(m)
    R = _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        L[i], L[j] = L[j], L[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in R:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):
        if k:
            D[dst] = [a - k * b for a, b in zip(D[dst], D[src])]
            L[dst] = [a - k * b for a, b in zip(L[dst], L[src])]

    def add_col(dst, src, k):
        if k:
            for row in D:
                row[dst] -= k * row[src]
            for row in R:
                row[dst] -= k * row[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // p)
                    if D[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // p)
                    if D[t][j]:
                        dirty = True
            if dirty:
                # a remainder survived: move the smallest entry of row/col t to the pivot
                cand = [(abs(D[i][t]), i, t) for i in range(t, m) if D[i][t]]
                cand += [(abs(D[t][j]), t, j) for j in range(t, n) if D[t][j]]
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            # pivot must divide the remaining block
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            L[t] = [-x for x in L[t]]
        t += 1
    return D, L, R


def invariant_factors(A):
    D, _, _ = smith_normal_form(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i]]


def integer_rank(A):
    return len(invariant_factors(A))


class TorsionError(ArithmeticError):
    pass


def eliminate_unimodular(rows, ncols=None):
    """Sparse elimination with unit pivots and Markowitz ordering.

    Parameters
    ----------
    rows : dict
        ``row id -> {col id: int}``; consumed (copied internally).

    Returns
    -------
    pivots : list of (row, col)
        In elimination order.
    leftover_rows : list
        Row ids never used as pivots, sorted.  Because pivots are units and
        leftover rows are only ever *receivers* of row operations, the inverse
        row transform maps each leftover row to itself.
    residual : dict
        Entries still present in leftover rows (nonempty means torsion or rank
        deficiency was not fully resolved).
    """
    R = {r: {c: int(v) for c, v in d.items() if v} for r, d in rows.items()}
    C = {}
    for r, d in R.items():
        for c in d:
            C.setdefault(c, set()).add(r)

    row_q = deque(sorted(r for r, d in R.items() if len(d) == 1))
    col_q = deque(sorted(c for c, s in C.items() if len(s) == 1))
    pivots = []

    def pick():
        while col_q:
            c = col_q.popleft()
            s = C.get(c)
            if s and len(s) == 1:
                r = next(iter(s))
                if abs(R[r][c]) == 1:
                    return r, c
        while row_q:
            r = row_q.popleft()
            d = R.get(r)
            if d and len(d) == 1:
                c = next(iter(d))
                if abs(d[c]) == 1:
                    return r, c
        best = None
        for r in sorted(R):
            d = R[r]
            for c, v in d.items():
                if abs(v) != 1:
                    continue
                cost = (len(d) - 1) * (len(C[c]) - 1)
                key = (cost, r, c)
                if best is None or key < best:
                    best = key
                    if cost == 0:
                        break
            if best is not None and best[0] == 0:
                break
        return None if best is None else (best[1], best[2])

    while True:
        if not any(R.values()):
            break
        pv = pick()
        if pv is None:
            break
        r, c = pv
        prow = R[r]
        p = prow[c]
        for r2 in sorted(C[c] - {r}):
            d2 = R[r2]
            k = d2[c] * p  # p is a unit, so p**-1 == p
            for c2, v in prow.items():
                nv = d2.get(c2, 0) - k * v
                if nv:
                    if c2 not in d2:
                        C[c2].add(r2)
                    d2[c2] = nv
                elif c2 in d2:
                    del d2[c2]
                    C[c2].discard(r2)
                    if len(C[c2]) == 1:
                        col_q.append(c2)
            if len(d2) == 1:
                row_q.append(r2)
        for c2 in prow:
            C[c2].discard(r)
            if c2 != c and len(C[c2]) == 1:
                col_q.append(c2)
        del C[c]
        del R[r]
        pivots.append((r, c))
    leftover = sorted(R)
    residual = {r: d for r, d in R.items() if d}
    if residual and not any(abs(v) == 1 for d in residual.values() for v in d.values()):
        raise TorsionError("no unit pivot left; the complex has torsion or is non-orientable")
    return pivots, leftover, residual
