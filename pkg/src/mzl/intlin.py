"""Small exact integer/rational linear algebra: column Hermite normal form,
integer solution lattices, rational null spaces."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[int]]


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def column_hnf(A: Sequence[Sequence[int]], ncols: Optional[int] = None) -> Tuple[Matrix, Matrix, int]:
    """Column-style Hermite form: returns ``(H, U, rank)`` with ``A U = H``.

    ``U`` is unimodular; the first ``rank`` columns of ``H`` are in echelon
    form with positive pivots and the remaining columns are zero.
    """
    m = len(A)
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    H = [list(map(int, row)) for row in A]
    U = identity(n)

    def colop(i, j, a, b, c, d):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for M in (H, U):
            for row in M:
                x, y = row[i], row[j]
                row[i], row[j] = a * x + b * y, c * x + d * y

    piv = 0
    for r in range(m):
        if piv >= n:
            break
        for j in range(piv + 1, n):
            if H[r][j] == 0:
                continue
            a, b = H[r][piv], H[r][j]
            g, x, y = _xgcd(a, b)
            # new col piv = x*col_piv + y*col_j ; new col j = -(b/g) col_piv + (a/g) col_j
            colop(piv, j, x, y, -b // g, a // g)
        if H[r][piv] == 0:
            continue
        if H[r][piv] < 0:
            for M in (H, U):
                for row in M:
                    row[piv] = -row[piv]
        # reduce entries left of the pivot
        for j in range(piv):
            f = H[r][j] // H[r][piv]
            if f:
                for M in (H, U):
                    for row in M:
                        row[j] -= f * row[piv]
        piv += 1
    return H, U, piv


def solve_integer(A: Sequence[Sequence[int]], b: Sequence[int], n: int):
    """All integer solutions of ``A x = b`` as ``(x0, K)``: ``x0 + K z``.

    ``K`` is an n x k basis (list of rows) of the integer kernel. Returns
    ``None`` when there is no integer solution.
    """
    if not A:
        return [0] * n, identity(n)
    H, U, rank = column_hnf(A, n)
    m = len(A)
    y = [0] * n
    piv_rows = []
    col = 0
    for r in range(m):
        if col < rank and H[r][col] != 0:
            piv_rows.append(r)
            col += 1
    # forward substitution through pivot rows, consistency on the rest
    col = 0
    for r in range(m):
        acc = sum(H[r][j] * y[j] for j in range(col))
        if col < rank and r == piv_rows[col]:
            rem = b[r] - acc
            if rem % H[r][col]:
                return None
            y[col] = rem // H[r][col]
            col += 1
        elif acc != b[r]:
            return None
    x0 = [sum(U[i][j] * y[j] for j in range(n)) for i in range(n)]
    K = [[U[i][j] for j in range(rank, n)] for i in range(n)]
    return x0, K


def integer_kernel(A: Sequence[Sequence[int]], n: int) -> Matrix:
    return solve_integer(A, [0] * len(A), n)[1] if A else identity(n)


def rank_q(rows: Sequence[Sequence]) -> int:
    return len(_rref(rows)[1])


def _rref(rows):
    M = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def nullspace_q(rows: Sequence[Sequence], n: int) -> List[List[Fraction]]:
    """Rational basis of ``{x : rows x = 0}`` in Q^n."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    R, pivots = _rref(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def primitive(v: Sequence) -> List[int]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints


def solve_q(cols: Sequence[Sequence[int]], target: Sequence) -> Optional[List[Fraction]]:
    """Solve ``sum c_j cols[j] = target`` over Q (columns independent)."""
    n = len(target)
    k = len(cols)
    rows = [[Fraction(cols[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    R, pivots = _rref(rows)
    if k in pivots:
        return None
    sol = [Fraction(0)] * k
    for i, p in enumerate(pivots):
        sol[p] = R[i][k]
    return sol


def inverse_q(M: Sequence[Sequence[int]]) -> List[List[Fraction]]:
    n = len(M)
    rows = [[Fraction(x) for x in M[i]] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, pivots = _rref(rows)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("singular matrix")
    return [row[n:] for row in R]


def matvec(M, v):
    return [sum(a * b for a, b in zip(row, v)) for row in M]


def transpose(M):
    return [list(r) for r in zip(*M)] if M else []
