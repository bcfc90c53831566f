"""Exact linear algebra over Q: fraction-free elimination and kernels.

`QMatrix` is a dense matrix of Fractions; rank and determinant go through
fraction-free (Bareiss) elimination over integers.  Kernels are computed by a
sparse reduced row echelon routine that produces a canonical basis: the basis
vectors, stacked as rows, are themselves in reduced echelon form with pivots
on the leftmost possible columns and first nonzero entry 1.  The same sparse
routine backs the large, very sparse systems that arise elsewhere in the
package, and Bareiss serves as an independent cross-check on rank.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

SparseRow = dict[int, Fraction]


class QMatrix:
    """A dense matrix with exact rational entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[Fraction | int]]):
        self.entries = [[Fraction(x) for x in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        if any(len(r) != self.cols for r in self.entries):
            raise ValueError("ragged rows")

    @staticmethod
    def zero(rows: int, cols: int) -> "QMatrix":
        return QMatrix([[0] * cols for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "QMatrix":
        return QMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self.entries[ij[0]][ij[1]]

    def mul_vec(self, v: Sequence[Fraction]) -> list[Fraction]:
        return [sum((row[j] * v[j] for j in range(self.cols)), Fraction(0)) for row in self.entries]

    def _integer_rows(self) -> list[list[int]]:
        out = []
        for row in self.entries:
            lcm = 1
            for x in row:
                lcm = lcm * x.denominator // gcd(lcm, x.denominator)
            out.append([int(x * lcm) for x in row])
        return out

    def rank(self) -> int:
        """Rank via Bareiss fraction-free elimination (integer arithmetic)."""
        m = self._integer_rows()
        rows, cols = self.rows, self.cols
        prev = 1
        pr = 0
        for pc in range(cols):
            piv = None
            for r in range(pr, rows):
                if m[r][pc] != 0:
                    piv = r
                    break
            if piv is None:
                continue
            if piv != pr:
                m[pr], m[piv] = m[piv], m[pr]
            p = m[pr][pc]
            for r in range(pr + 1, rows):
                factor = m[r][pc]
                row_r = m[r]
                row_p = m[pr]
                for c in range(pc, cols):
                    row_r[c] = (p * row_r[c] - factor * row_p[c]) // prev
            prev = p
            pr += 1
            if pr == rows:
                break
        return pr

    def det(self) -> Fraction:
        """Exact determinant (Bareiss on an integer scaling of the matrix)."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return Fraction(1)
        scale = Fraction(1)
        m = []
        for row in self.entries:
            lcm = 1
            for x in row:
                lcm = lcm * x.denominator // gcd(lcm, x.denominator)
            scale *= lcm
            m.append([int(x * lcm) for x in row])
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for r in range(k + 1, n):
                    if m[r][k] != 0:
                        m[k], m[r] = m[r], m[k]
                        sign = -sign
                        break
                else:
                    return Fraction(0)
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return Fraction(sign * m[n - 1][n - 1], 1) / scale

    def nullspace(self) -> list[list[Fraction]]:
        """Canonical exact basis of ker(M); empty list for injective M."""
        rows = [
            {j: x for j, x in enumerate(row) if x != 0}
            for row in self.entries
        ]
        basis = sparse_nullspace(rows, self.cols)
        return [[v.get(j, Fraction(0)) for j in range(self.cols)] for v in basis]


def _sparse_rref(rows: list[SparseRow], ncols: int) -> tuple[list[SparseRow], list[int]]:
    """Reduced row echelon form of sparse rows; returns (rref rows, pivot cols).

    The result is the canonical RREF of the row space, independent of the
    input row order.
    """
    buckets: dict[int, list[SparseRow]] = {}
    for r in rows:
        if r:
            buckets.setdefault(min(r), []).append(r)
    pivots: list[tuple[int, SparseRow]] = []
    for col in range(ncols):
        pending = buckets.pop(col, None)
        if not pending:
            continue
        pending.sort(key=len)
        piv = pending[0]
        inv = Fraction(1) / piv[col]
        piv = {j: x * inv for j, x in piv.items()}
        pivots.append((col, piv))
        for row in pending[1:]:
            f = row[col]
            new = dict(row)
            for j, x in piv.items():
                s = new.get(j, _F0) - f * x
                if s == 0:
                    new.pop(j, None)
                else:
                    new[j] = s
            if new:
                buckets.setdefault(min(new), []).append(new)
    # back-substitution pass: clear pivot columns from earlier pivot rows
    for i in range(len(pivots) - 1, -1, -1):
        col, piv = pivots[i]
        for k in range(i):
            _, row = pivots[k]
            f = row.get(col)
            if f is None:
                continue
            for j, x in piv.items():
                s = row.get(j, _F0) - f * x
                if s == 0:
                    row.pop(j, None)
                else:
                    row[j] = s
    return [p for _, p in pivots], [c for c, _ in pivots]


def sparse_nullspace(rows: list[SparseRow], ncols: int) -> list[SparseRow]:
    """Canonical kernel basis of a sparse matrix given as rows.

    Basis vectors, stacked as rows over the same column order, are in reduced
    echelon form with first nonzero entry 1; this makes the output unique for
    a given subspace.
    """
    rref, pivot_cols = _sparse_rref(rows, ncols)
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    raw: list[SparseRow] = []
    for f in free_cols:
        v: SparseRow = {f: Fraction(1)}
        for (p, row) in zip(pivot_cols, rref):
            x = row.get(f)
            if x is not None and x != 0:
                v[p] = -x
        raw.append(v)
    canon, _ = _sparse_rref(raw, ncols)
    return canon


def nullspace_dense(rows: Sequence[Sequence[Fraction | int]], ncols: int | None = None) -> list[list[Fraction]]:
    """Convenience wrapper: canonical kernel basis as dense vectors."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    sparse = [{j: Fraction(x) for j, x in enumerate(row) if x != 0} for row in rows]
    basis = sparse_nullspace(sparse, ncols)
    return [[v.get(j, Fraction(0)) for j in range(ncols)] for v in basis]


_F0 = Fraction(0)


def field_inverse(matrix: list[list], zero, one) -> list[list]:
    """Gauss-Jordan inverse over any exact field (duck-typed entries).

    Raises ValueError on a singular matrix.
    """
    n = len(matrix)
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col]:
                piv = r
                break
        if piv is None:
            raise ValueError("singular matrix")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv = one / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def solve_with_residuals(matrix: list[list], rhs: list, zero, one):
    """Gaussian elimination over any exact field given by duck-typed elements.

    Solves M x = b for the pivot variables (free variables are set to zero)
    and returns (x, residuals) where residuals are the entries of b - M x.
    Elements must support +, -, *, /, bool (nonzero test).  Used with both
    Fraction and RationalFunction entries.
    """
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    m = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    pivots: list[tuple[int, int]] = []
    pr = 0
    for pc in range(ncols):
        piv = None
        for r in range(pr, nrows):
            if m[r][pc]:
                piv = r
                break
        if piv is None:
            continue
        if piv != pr:
            m[pr], m[piv] = m[piv], m[pr]
        inv = one / m[pr][pc]
        m[pr] = [x * inv for x in m[pr]]
        for r in range(nrows):
            if r != pr and m[r][pc]:
                f = m[r][pc]
                m[r] = [a - f * b for a, b in zip(m[r], m[pr])]
        pivots.append((pr, pc))
        pr += 1
        if pr == nrows:
            break
    x = [zero] * ncols
    for r, c in pivots:
        x[c] = m[r][ncols]
    residuals = []
    for i, row in enumerate(matrix):
        acc = rhs[i]
        for j in range(ncols):
            if x[j]:
                acc = acc - row[j] * x[j]
        residuals.append(acc)
    return x, residuals
