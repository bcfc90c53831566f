"""Exact linear algebra: kernels, rank, determinant, field solves."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mage.linalg import QMatrix, field_inverse, nullspace_dense, solve_with_residuals


def frac_matrix(rows, cols):
    entry = st.fractions(min_value=-4, max_value=4, max_denominator=3)
    return st.lists(st.lists(entry, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


class TestNullspace:
    def test_one_dimensional_kernel(self):
        m = QMatrix([[1, 1, 0], [0, 0, 1]])
        assert m.nullspace() == [[Fraction(1), Fraction(-1), Fraction(0)]]

    def test_identity_has_trivial_kernel(self):
        assert QMatrix.identity(4).nullspace() == []

    def test_zero_matrix_kernel_is_standard_basis(self):
        basis = QMatrix.zero(2, 3).nullspace()
        assert basis == [
            [Fraction(1), Fraction(0), Fraction(0)],
            [Fraction(0), Fraction(1), Fraction(0)],
            [Fraction(0), Fraction(0), Fraction(1)],
        ]

    def test_first_nonzero_entry_is_one(self):
        m = QMatrix([[2, 4, 6], [1, 2, 3]])
        for v in m.nullspace():
            lead = next(x for x in v if x != 0)
            assert lead == 1

    @given(frac_matrix(3, 5))
    @settings(max_examples=40, deadline=None)
    def test_kernel_vectors_annihilate(self, rows):
        m = QMatrix(rows)
        basis = m.nullspace()
        for v in basis:
            assert all(x == 0 for x in m.mul_vec(v))
        assert m.rank() + len(basis) == m.cols

    @given(frac_matrix(4, 3))
    @settings(max_examples=40, deadline=None)
    def test_rank_routes_agree(self, rows):
        m = QMatrix(rows)
        # Bareiss (integer, fraction-free) vs RREF pivot count
        assert m.rank() == m.cols - len(m.nullspace())

    def test_canonical_basis_is_order_independent(self):
        rows = [[1, 2, 3, 4], [0, 1, 1, 1]]
        a = QMatrix(rows).nullspace()
        b = QMatrix(rows[::-1]).nullspace()
        assert a == b


def cofactor_det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = Fraction(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * cofactor_det(minor)
        total += -term if j % 2 else term
    return total


class TestDeterminantAndRank:
    @given(frac_matrix(3, 3))
    @settings(max_examples=40, deadline=None)
    def test_det_against_cofactor_expansion(self, rows):
        rows = [[Fraction(x) for x in r] for r in rows]
        assert QMatrix(rows).det() == cofactor_det(rows)

    def test_singular_det(self):
        assert QMatrix([[1, 2], [2, 4]]).det() == 0

    def test_rank_examples(self):
        assert QMatrix([[1, 0], [0, 1]]).rank() == 2
        assert QMatrix([[1, 2], [2, 4]]).rank() == 1
        assert QMatrix.zero(3, 3).rank() == 0


class TestFieldRoutines:
    def test_inverse(self):
        m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
        inv = field_inverse(m, Fraction(0), Fraction(1))
        assert inv == [[Fraction(1), Fraction(-1)], [Fraction(-1), Fraction(2)]]

    def test_inverse_singular_raises(self):
        m = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
        with pytest.raises(ValueError):
            field_inverse(m, Fraction(0), Fraction(1))

    def test_solve_with_residuals_consistent(self):
        m = [[Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)], [Fraction(1), Fraction(2)]]
        rhs = [Fraction(3), Fraction(1), Fraction(4)]
        x, res = solve_with_residuals(m, rhs, Fraction(0), Fraction(1))
        assert x == [Fraction(2), Fraction(1)]
        assert all(r == 0 for r in res)

    def test_solve_with_residuals_inconsistent(self):
        m = [[Fraction(1)], [Fraction(1)]]
        rhs = [Fraction(1), Fraction(2)]
        x, res = solve_with_residuals(m, rhs, Fraction(0), Fraction(1))
        assert any(r != 0 for r in res)
