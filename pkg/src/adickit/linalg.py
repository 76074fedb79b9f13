"""Exact linear algebra over Q and over Z/p^N.

Matrices are lists of rows.  Everything stays in ``Fraction``/``int``; no
floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns."""
    m = to_fraction_matrix(rows)
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def solve(A: Sequence[Sequence], b: Sequence) -> Optional[List[Fraction]]:
    """One solution x of A x = b over Q, or None."""
    if not A:
        return [] if all(Fraction(x) == 0 for x in b) else None
    ncols = len(A[0])
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    m, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for row, c in zip(m, piv):
        x[c] = row[ncols]
    return x


def nullspace(A: Sequence[Sequence], ncols: Optional[int] = None) -> List[List[Fraction]]:
    """Basis of {x : A x = 0} over Q."""
    if not A:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    ncols = len(A[0])
    m, piv = rref(A)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, c in zip(m, piv):
            v[c] = -row[f]
        basis.append(v)
    return basis


def _vp_int(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def elementary_divisor_exponents(rows: Sequence[Sequence[int]], p: int, N: int) -> List[int]:
    """Exponents e_i (capped at N) of the Smith form of an integer matrix over Z/p^N.

    The image of the matrix in (Z/p^N)^m is isomorphic to the sum of
    p^{e_i} Z / p^N Z; its length is sum (N - e_i).
    """
    q = p ** N
    m = [[int(x) % q for x in row] for row in rows]
    if not m:
        return []
    nrows, ncols = len(m), len(m[0])
    exps = []
    r = 0
    for _ in range(min(nrows, ncols)):
        best = None
        for i in range(r, nrows):
            for j in range(r, ncols):
                if m[i][j] % q:
                    v = _vp_int(m[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        m[r], m[i] = m[i], m[r]
        for row in m:
            row[r], row[j] = row[j], row[r]
        unit = m[r][r] // p ** v
        inv = pow(unit, -1, q)
        for i in range(r + 1, nrows):
            if m[i][r] % q:
                f = (m[i][r] // p ** v) * inv % q
                m[i] = [(a - f * b) % q for a, b in zip(m[i], m[r])]
        for j in range(r + 1, ncols):
            if m[r][j] % q:
                f = (m[r][j] // p ** v) * inv % q
                for row in m:
                    row[j] = (row[j] - f * row[r]) % q
        exps.append(v)
        r += 1
    return exps


def image_length(rows: Sequence[Sequence[int]], p: int, N: int) -> int:
    """Length of the Z_p-module spanned by the columns, reduced mod p^N."""
    return sum(N - e for e in elementary_divisor_exponents(rows, p, N))
