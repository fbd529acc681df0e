from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from sympy.polys.matrices import DomainMatrix

from brickstress import exact

from strategies import rationals


def oracle(rows):
    return DomainMatrix([[sympy.QQ(v.numerator, v.denominator) for v in r] for r in rows], (len(rows), len(rows[0])), sympy.QQ)


def matrices(min_size=1, max_size=5, square=False):
    def build(shape):
        n, m = shape
        return st.lists(st.lists(rationals, min_size=m, max_size=m), min_size=n, max_size=n)

    dims = st.integers(min_size, max_size)
    shapes = dims.map(lambda n: (n, n)) if square else st.tuples(dims, dims)
    return shapes.flatmap(build)


class TestAgainstSympy:
    @given(matrices())
    def test_rank(self, rows):
        assert exact.rank(rows) == oracle(rows).rank()

    @given(matrices(square=True))
    def test_determinant(self, rows):
        det = oracle(rows).det()
        assert exact.determinant(rows) == Fraction(int(det.numerator), int(det.denominator))

    @given(matrices())
    def test_nullspace(self, rows):
        null = exact.nullspace(rows)
        assert len(null) == len(rows[0]) - oracle(rows).rank()
        for v in null:
            assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in rows)


class TestSolveInverse:
    def test_inverse_identity(self):
        a = exact.to_fractions([[2, 1, 0], [1, 3, 1], [0, 1, 4]])
        inv = exact.inverse(a)
        assert exact.matmul(a, inv) == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]

    def test_solve(self):
        a = [[1, 2], [3, 4]]
        assert exact.solve(a, [5, 6]) == [Fraction(-4), Fraction(9, 2)]

    def test_singular_carries_null_vector(self):
        a = [[1, 2], [2, 4]]
        with pytest.raises(exact.SingularMatrixError) as err:
            exact.inverse(a)
        v = err.value.null_vector
        assert v is not None and any(v)
        assert all(sum(Fraction(x) * y for x, y in zip(r, v)) == 0 for r in a)
        assert exact.determinant(a) == 0

    def test_empty_nullspace_needs_width(self):
        with pytest.raises(ValueError):
            exact.nullspace([])
        assert len(exact.nullspace([], 3)) == 3

    def test_nonsquare_determinant(self):
        with pytest.raises(ValueError):
            exact.determinant([[1, 2]])
