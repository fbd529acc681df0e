"""Gaussian elimination over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`.  Nothing here
rounds, so rank and singularity decisions are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


class SingularMatrixError(ArithmeticError):
    """Raised for singular input; carries a nonzero nullspace vector."""

    def __init__(self, message: str, null_vector: list[Fraction] | None = None):
        super().__init__(message)
        self.null_vector = null_vector


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    m = to_fractions(rows)
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        row_r = [v * inv for v in m[r]]
        m[r] = row_r
        nz = [j for j in range(c, ncols) if row_r[j]]
        for i in range(nrows):
            if i != r:
                f = m[i][c]
                if f:
                    row_i = m[i]
                    for j in nz:
                        row_i[j] -= f * row_r[j]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{x : rows @ x = 0}`` (one vector per free column)."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols needed for an empty matrix")
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    m, pivots = rref(rows)
    n = len(m[0])
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][f]
        basis.append(v)
    return basis


def determinant(rows: Sequence[Sequence]) -> Fraction:
    m = to_fractions(rows)
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        p = m[c][c]
        det *= p
        row_c = m[c]
        nz = [j for j in range(c + 1, n) if row_c[j]]
        for i in range(c + 1, n):
            f = m[i][c] / p
            if f:
                row_i = m[i]
                for j in nz:
                    row_i[j] -= f * row_c[j]
    return det


def inverse(rows: Sequence[Sequence]) -> Matrix:
    """Exact inverse; raises :class:`SingularMatrixError` with a null vector."""
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len([p for p in pivots if p < n]) < n:
        null = nullspace(rows)
        raise SingularMatrixError(
            f"matrix of size {n} is singular (rank {len([p for p in pivots if p < n])})",
            null[0] if null else None,
        )
    return [row[n:] for row in m]


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    n = len(rows)
    aug = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        raise SingularMatrixError("singular system", (nullspace(rows) or [None])[0])
    return [m[i][n] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]
