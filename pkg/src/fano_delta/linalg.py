"""Exact dense linear algebra over Q (and over Q-linear rhs entries).

Gaussian elimination with Fraction pivots.  The systems in this package are
tiny (at most ~12 x 12), so clarity wins over asymptotics.  Right-hand sides
may contain Poly entries: only addition and scaling by Fractions is ever
applied to them.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def _copy(rows: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in rows]


def solve(a: Sequence[Sequence[Fraction]], b: Sequence) -> list:
    """Solve a square nonsingular system a*x = b exactly.

    b entries may be Fractions or Polys.  Raises ValueError on a singular
    matrix.
    """
    n = len(a)
    m = _copy(a)
    rhs = list(b)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [x * inv for x in m[col]]
        rhs[col] = rhs[col] * inv
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
                rhs[r] = rhs[r] - f * rhs[col]
    return rhs


def solve_overdetermined(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> list[Fraction] | None:
    """Solve a (possibly) overdetermined consistent system exactly.

    Returns the unique solution if the system is consistent with full column
    rank; returns None if inconsistent; returns a list containing None if the
    solution is not unique (rank-deficient).
    """
    n_cols = len(rows[0]) if rows else 0
    m = [_copy(rows)[i] + [rhs[i]] for i in range(len(rows))]
    rank = 0
    pivots: list[int] = []
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = Fraction(1) / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    for r in range(rank, len(m)):
        if m[r][n_cols] != 0:
            return None  # inconsistent
    if rank < n_cols:
        return [None] * n_cols  # underdetermined
    out = [Fraction(0)] * n_cols
    for r, col in enumerate(pivots):
        out[col] = m[r][n_cols]
    return out


def nullspace(a: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Exact basis of the right nullspace of a (rows) as a list of vectors."""
    if not a:
        return []
    n_cols = len(a[0])
    m = _copy(a)
    rank = 0
    pivots: list[int] = []
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = Fraction(1) / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n_cols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -m[r][fc]
        basis.append(vec)
    return basis


def column_space_basis(a: Sequence[Sequence[Fraction]]) -> list[int]:
    """Indices of a maximal set of linearly independent columns of a."""
    if not a:
        return []
    n_cols = len(a[0])
    m = _copy(a)
    rank = 0
    pivots: list[int] = []
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = Fraction(1) / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    return pivots


def determinant(a: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(a)
    m = _copy(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


def det3(u: Sequence[int], v: Sequence[int], w: Sequence[int]) -> int:
    """Integer determinant of the 3x3 matrix with rows u, v, w."""
    return (
        u[0] * (v[1] * w[2] - v[2] * w[1])
        - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
    )


def is_negative_definite(a: Sequence[Sequence[Fraction]]) -> bool:
    """Exact test via leading principal minors: (-1)^k det_k > 0."""
    n = len(a)
    for k in range(1, n + 1):
        minor = determinant([row[:k] for row in a[:k]])
        if (minor if k % 2 == 0 else -minor) <= 0:
            return False
    return True
