from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from brickstress.polybox import (
    MAX_DEGREE,
    Box,
    DegreeCapError,
    Polynomial,
    compose_affine,
    derivative,
    evaluate,
    format_polynomial,
    integrate_axes,
    integrate_box,
    monomial_values,
    restrict,
    span_rank,
)

from strategies import polynomials, rationals

x1, x2, x3 = (Polynomial.variable(i) for i in range(3))
X = sympy.symbols("x1 x2 x3")


def to_sympy(p: Polynomial):
    return sum(
        (sympy.Rational(c.numerator, c.denominator) * X[0] ** a * X[1] ** b * X[2] ** d for (a, b, d), c in p.terms.items()),
        sympy.Integer(0),
    )


class TestConstruction:
    def test_zero_coefficients_dropped(self):
        p = Polynomial({(1, 0, 0): 0, (0, 1, 0): Fraction(1, 2)})
        assert dict(p.terms) == {(0, 1, 0): Fraction(1, 2)}

    def test_degree_cap(self):
        Polynomial.monomial((MAX_DEGREE, 0, 0))
        with pytest.raises(DegreeCapError):
            Polynomial.monomial((MAX_DEGREE + 1, 0, 0))
        with pytest.raises(DegreeCapError):
            x1**5 * x1**4

    def test_terms_sorted(self):
        p = x3 + x1 + 1 + x2
        assert list(p.terms) == sorted(p.terms)

    def test_degrees(self):
        p = x1**2 * x2 + x3**3
        assert p.degrees() == (2, 1, 3)
        assert p.total_degree() == 3
        assert Polynomial().degrees() == (-1, -1, -1)
        assert p.fits((2, 1, 3)) and not p.fits((2, 1, 2))

    def test_format(self):
        assert format_polynomial(Polynomial()) == "0"
        assert "x1" in format_polynomial(x1 * Fraction(-1, 2))

    def test_immutable_hashable(self):
        assert len({x1 + x2, x2 + x1}) == 1


class TestEvaluate:
    def test_examples(self):
        assert evaluate(x1**2 * x2, (2, 3, 1)) == 12
        assert evaluate(Polynomial(), (0.3, 1, 2)) == 0
        assert evaluate(1 - x1, (1, 0, 0)) == 0

    def test_exact_vs_float(self):
        p = x1 / 3
        assert evaluate(p, (1, 0, 0)) == Fraction(1, 3)
        assert isinstance(evaluate(p, (1.0, 0, 0)), float)

    @given(polynomials(), polynomials(), st.tuples(rationals, rationals, rationals))
    def test_product_homomorphism(self, p, q, x):
        assert evaluate(p * q, x) == evaluate(p, x) * evaluate(q, x)

    def test_vectorized_matches_exact(self):
        rng = np.random.default_rng(1)
        p = x1**3 * x2 - 2 * x2 * x3**2 + Fraction(1, 7)
        pts = rng.random((10, 3))
        vals = np.einsum("xyz,qxyz->q", p.to_dense(), monomial_values(pts))
        ref = [evaluate(p, tuple(pt)) for pt in pts]
        assert np.allclose(vals, ref, rtol=1e-14, atol=1e-15)


class TestDerivative:
    def test_examples(self):
        assert derivative(x1**2 * Fraction(-1, 2), 0) == -x1
        assert derivative(x1 * x2, 1) == x1
        assert derivative(x1**2 * x2, 2) == Polynomial()

    @given(polynomials(), polynomials(), st.integers(0, 2))
    def test_leibniz(self, p, q, axis):
        assert derivative(p * q, axis) == derivative(p, axis) * q + p * derivative(q, axis)

    @given(polynomials(), st.integers(0, 2))
    def test_against_sympy(self, p, axis):
        assert to_sympy(derivative(p, axis)) == sympy.expand(sympy.diff(to_sympy(p), X[axis]))

    @given(polynomials(), st.integers(0, 2))
    def test_degree_drops_by_one(self, p, axis):
        d = derivative(p, axis)
        if p.degrees()[axis] > 0:
            assert d.degrees()[axis] == p.degrees()[axis] - 1


class TestIntegrate:
    def test_examples(self):
        unit = Box.unit()
        assert integrate_box(Polynomial.constant(1), unit) == 1
        assert integrate_box(x1**2 * x2, unit) == Fraction(1, 6)
        assert integrate_box(x1 * (1 - x1), unit) == Fraction(1, 6)

    def test_degenerate_box(self):
        with pytest.raises(ValueError):
            Box((0, 0, 0), (1, 0, 1))

    @given(polynomials(), st.permutations([0, 1, 2]))
    def test_fubini(self, p, order):
        box = Box((0, Fraction(-1, 2), 1), (2, Fraction(1, 3), 3))
        q = p
        for ax in order:
            q = integrate_axes(q, {ax: (box.lo[ax], box.hi[ax])})
        assert q.terms.get((0, 0, 0), 0) == integrate_box(p, box)

    @given(polynomials())
    def test_against_sympy(self, p):
        box = Box((0, 1, -1), (Fraction(1, 2), 2, 1))
        ref = sympy.integrate(to_sympy(p), (X[0], 0, sympy.Rational(1, 2)), (X[1], 1, 2), (X[2], -1, 1))
        assert sympy.Rational(str(integrate_box(p, box))) == ref


class TestRestrict:
    def test_examples(self):
        assert restrict(x1 * x2 * x3, 2, 1) == x1 * x2
        assert restrict(x3**2, 2, 0) == Polynomial()
        assert restrict(1 - x2, 0, 1) == 1 - x2

    @given(polynomials(), st.integers(0, 2), rationals)
    def test_drops_axis(self, p, axis, v):
        assert restrict(p, axis, v).degrees()[axis] <= 0


class TestComposeAffine:
    @given(polynomials(), st.tuples(rationals, rationals, rationals))
    def test_pointwise(self, p, x):
        scale, shift = (2, Fraction(1, 3), 1), (1, 0, Fraction(-1, 2))
        q = compose_affine(p, scale, shift)
        y = tuple(a * v + b for a, v, b in zip(scale, x, shift))
        assert evaluate(q, x) == evaluate(p, y)

    def test_span_rank(self):
        assert span_rank([x1, x2, x1 + x2]) == 2
        assert span_rank([]) == 0
