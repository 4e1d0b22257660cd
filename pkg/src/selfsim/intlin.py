"""Exact integer linear algebra: Smith and Hermite normal forms, lattices.

Matrices are lists of rows of Python ints.  Lattices in Z^n are given by
a list of generating column vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def zeros(r: int, c: int) -> list[list[int]]:
    return [[0] * c for _ in range(r)]


def eye(n: int) -> list[list[int]]:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = 1
    return m


def copy(a):
    return [list(r) for r in a]


def shape(a, ncols: int | None = None) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else (ncols or 0))


def matmul(a, b, inner: int | None = None):
    if not a:
        return []
    n = len(b) if b else (inner or 0)
    c = len(b[0]) if b else 0
    out = zeros(len(a), c)
    for i, row in enumerate(a):
        o = out[i]
        for k in range(n):
            v = row[k]
            if v:
                bk = b[k]
                for j in range(c):
                    o[j] += v * bk[j]
    return out


def matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a, ncols: int = 0):
    if not a:
        return [[] for _ in range(ncols)]
    return [list(r) for r in zip(*a)]


def matpow(a, k: int):
    out = eye(len(a))
    base = copy(a)
    while k:
        if k & 1:
            out = matmul(out, base)
        base = matmul(base, base)
        k >>= 1
    return out


def det(a) -> int:
    """Exact determinant by fraction-free elimination (Bareiss)."""
    n = len(a)
    if n == 0:
        return 1
    m = copy(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def columns(a, ncols: int | None = None):
    r, c = shape(a, ncols)
    return [[a[i][j] for i in range(r)] for j in range(c)]


def from_columns(cols, nrows: int):
    if not cols:
        return [[] for _ in range(nrows)]
    return [[col[i] for col in cols] for i in range(nrows)]


@dataclass
class SNF:
    """U * A * V = D with U, V unimodular and D diagonal (divisibility chain)."""

    U: list
    V: list
    D: list
    diag: list  # nonzero diagonal entries, positive, d1 | d2 | ...

    @property
    def rank(self) -> int:
        return len(self.diag)


def smith(a, ncols: int | None = None) -> SNF:
    """Smith normal form with deterministic minimal-absolute-value pivoting.

    `ncols` is needed only when `a` has no rows or empty rows.
    """
    r = len(a)
    c = ncols if ncols is not None else (len(a[0]) if a else 0)
    d = copy(a)
    u = eye(r)
    v = eye(c)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row dst += k * row src
        if k:
            d[dst] = [x + k * y for x, y in zip(d[dst], d[src])]
            u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, k):
        if k:
            for row in d:
                row[dst] += k * row[src]
            for row in v:
                row[dst] += k * row[src]

    t = 0
    while t < min(r, c):
        best = None
        for i in range(t, r):
            for j in range(t, c):
                x = d[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = d[t][t]
            done = True
            for i in range(t + 1, r):
                if d[i][t]:
                    add_row(t, i, -(d[i][t] // p))
                    if d[i][t]:
                        done = False
            for j in range(t + 1, c):
                if d[t][j]:
                    add_col(t, j, -(d[t][j] // p))
                    if d[t][j]:
                        done = False
            if done:
                # divisibility of the remaining block
                bad = None
                for i in range(t + 1, r):
                    for j in range(t + 1, c):
                        if d[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(bad, t, 1)
                continue
            # move the smallest entry of row/column t to the pivot
            best = (abs(d[t][t]), t, t)
            for i in range(t + 1, r):
                if d[i][t] and abs(d[i][t]) < best[0]:
                    best = (abs(d[i][t]), i, t)
            for j in range(t + 1, c):
                if d[t][j] and abs(d[t][j]) < best[0]:
                    best = (abs(d[t][j]), t, j)
            _, i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    diag = [d[i][i] for i in range(min(r, c)) if d[i][i]]
    return SNF(u, v, d, diag)


def is_unimodular(a) -> bool:
    return abs(det(a)) == 1


def hnf_columns(cols: list[list[int]], n: int) -> list[list[int]]:
    """Canonical basis (column Hermite form) of the lattice spanned by `cols` in Z^n."""
    rows = [list(c) for c in cols if any(c)]
    # row-style HNF on the transposed generator matrix
    basis: list[list[int]] = []
    work = rows
    lead = 0
    while work and lead < n:
        nz = [w for w in work if w[lead]]
        rest = [w for w in work if not w[lead]]
        if not nz:
            lead += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda w: abs(w[lead]))
            p = nz[0]
            nxt = [p]
            for w in nz[1:]:
                q = w[lead] // p[lead]
                w2 = [x - q * y for x, y in zip(w, p)]
                if w2[lead]:
                    nxt.append(w2)
                elif any(w2):
                    rest.append(w2)
            nz = nxt
        p = nz[0]
        if p[lead] < 0:
            p = [-x for x in p]
        basis.append(p)
        work = rest
        lead += 1
    # reduce entries above pivots
    piv = []
    for b in basis:
        piv.append(next(i for i, x in enumerate(b) if x))
    for k in range(len(basis)):
        pk = piv[k]
        for j in range(k):
            q = basis[j][pk] // basis[k][pk]
            if q:
                basis[j] = [x - q * y for x, y in zip(basis[j], basis[k])]
    return basis


def same_lattice(a: list, b: list, n: int) -> bool:
    return hnf_columns(a, n) == hnf_columns(b, n)


def kernel(a, ncols: int) -> list[list[int]]:
    """Basis of {x in Z^ncols : a x = 0}."""
    if not a:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    s = smith(a, ncols=ncols)
    return hnf_columns([[s.V[i][j] for i in range(ncols)] for j in range(s.rank, ncols)], ncols)


def preimage(a, lattice: list, ncols: int) -> list[list[int]]:
    """Basis of {x in Z^ncols : a x lies in the lattice spanned by `lattice`}."""
    nrows = len(a)
    if not lattice:
        return kernel(a, ncols)
    big = [list(a[i]) + [-v[i] for v in lattice] for i in range(nrows)]
    ker = kernel(big, ncols + len(lattice))
    return hnf_columns([k[:ncols] for k in ker], ncols)


class Solver:
    """Repeated integer solves of a x = b for a fixed matrix."""

    def __init__(self, a, ncols: int):
        self.nrows = len(a)
        self.ncols = ncols
        self.snf = smith(a, ncols=ncols) if self.nrows else None

    def __call__(self, b):
        if self.nrows == 0:
            return [0] * self.ncols
        s = self.snf
        ub = matvec(s.U, b)
        y = [0] * self.ncols
        for i in range(self.nrows):
            if i < s.rank:
                if ub[i] % s.diag[i]:
                    return None
                y[i] = ub[i] // s.diag[i]
            elif ub[i]:
                return None
        return matvec(s.V, y)


def solve(a, b, ncols: int):
    """Some integer x with a x = b, or None."""
    return Solver(a, ncols)(b)


def in_lattice(v: list[int], lattice: list, n: int) -> bool:
    if not any(v):
        return True
    if not lattice:
        return False
    return solve(from_columns(lattice, n), v, len(lattice)) is not None


def rank_q(a) -> int:
    """Rank over the rationals."""
    m = [[Fraction(x) for x in r] for r in a]
    rank = 0
    rows = len(m)
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rows):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def inverse_unimodular(a) -> list[list[int]]:
    """Inverse of a unimodular integer matrix."""
    n = len(a)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c])
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        m[c] = [x / pv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    out = [[m[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for r in out for x in r):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in r] for r in out]
