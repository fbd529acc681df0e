"""Hypothesis strategies and random generators shared by the tests."""

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from brickstress.polybox import Polynomial
from brickstress.ref_element import SYM_INDEX, MatrixPolynomial

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
exponents = st.tuples(*(st.integers(0, 3) for _ in range(3)))


@st.composite
def polynomials(draw, max_terms=5):
    terms = draw(st.dictionaries(exponents, rationals, max_size=max_terms))
    return Polynomial(terms)


def random_polynomial(rng, deg=3, density=0.3) -> Polynomial:
    terms = {}
    for e in np.ndindex(deg + 1, deg + 1, deg + 1):
        if rng.random() < density:
            terms[e] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    return Polynomial(terms)


def random_matrix_polynomial(rng, deg=3) -> MatrixPolynomial:
    return MatrixPolynomial({ij: random_polynomial(rng, deg) for ij in SYM_INDEX})
