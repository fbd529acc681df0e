"""Exact trivariate polynomials with rational coefficients.

Polynomials are immutable sparse maps from exponent triples ``(e1, e2, e3)``
to :class:`fractions.Fraction` coefficients.  Axes are 0-based throughout the
package: axis 0 is ``x1``, axis 1 is ``x2`` and axis 2 is ``x3``.

Besides the exact operations (arithmetic, differentiation, restriction,
closed-form integration over boxes) the module offers a floating-point path
(:meth:`Polynomial.to_dense`, :func:`monomial_values`) used during assembly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DEGREE = 8

Exponent = tuple[int, int, int]


class DegreeCapError(ValueError):
    """Raised when a per-variable exponent exceeds :data:`MAX_DEGREE`."""


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, floats (exactly) or numeric strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, Rational, np.integer)) and not isinstance(value, bool)


class Polynomial:
    """Immutable polynomial in ``x1, x2, x3`` with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, object] | None = None):
        clean: dict[Exponent, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or min(exps) < 0:
                raise ValueError(f"bad exponent triple {exps!r}")
            if max(exps) > MAX_DEGREE:
                raise DegreeCapError(f"exponent {exps} exceeds cap {MAX_DEGREE}")
            c = as_fraction(coeff)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls({(0, 0, 0): value})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff=1) -> "Polynomial":
        return cls({tuple(exps): coeff})

    @classmethod
    def variable(cls, axis: int) -> "Polynomial":
        exps = [0, 0, 0]
        exps[axis] = 1
        return cls({tuple(exps): 1})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> Exponent:
        """Per-variable degrees; ``(-1, -1, -1)`` for the zero polynomial."""
        if not self._terms:
            return (-1, -1, -1)
        return tuple(max(e[a] for e in self._terms) for a in range(3))

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def fits(self, bounds: Sequence[int]) -> bool:
        """True when every term respects the per-variable degree bounds."""
        return all(all(e[a] <= bounds[a] for a in range(3)) for e in self._terms)

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = as_fraction(other)
            return Polynomial({e: c * v for e, v in self._terms.items()})
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / as_fraction(other))

    def __pow__(self, n: int):
        out = Polynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Polynomial.constant(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)})"

    def __call__(self, x):
        return evaluate(self, x)

    # calculus
    def derivative(self, axis: int) -> "Polynomial":
        return derivative(self, axis)

    def restrict(self, axis: int, value) -> "Polynomial":
        return restrict(self, axis, value)

    # floating-point path
    def to_dense(self, shape: Sequence[int] = (4, 4, 4)) -> np.ndarray:
        """Dense float coefficient array indexed by exponents."""
        arr = np.zeros(tuple(shape))
        for e, c in self._terms.items():
            if any(e[a] >= shape[a] for a in range(3)):
                raise DegreeCapError(f"term {e} does not fit dense shape {tuple(shape)}")
            arr[e] = float(c)
        return arr

    @classmethod
    def from_dense(cls, arr) -> "Polynomial":
        arr = np.asarray(arr)
        return cls({tuple(int(i) for i in idx): arr[idx] for idx in zip(*np.nonzero(arr))})


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.terms.items():
        mono = "*".join(
            f"x{a + 1}" if k == 1 else f"x{a + 1}^{k}" for a, k in enumerate(e) if k
        )
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def evaluate(p: Polynomial, x: Sequence) -> Fraction | float:
    """Value of ``p`` at ``x``.

    The sum is formed exactly; if any coordinate is a float the exact result
    is rounded once to a float, otherwise the exact rational is returned.
    """
    exact = all(_is_exact(v) for v in x)
    xs = [as_fraction(v) for v in x]
    total = Fraction(0)
    for e, c in p.terms.items():
        total += c * xs[0] ** e[0] * xs[1] ** e[1] * xs[2] ** e[2]
    return total if exact else float(total)


def derivative(p: Polynomial, axis: int) -> Polynomial:
    out = {}
    for e, c in p.terms.items():
        k = e[axis]
        if k:
            ne = list(e)
            ne[axis] = k - 1
            out[tuple(ne)] = c * k
    return Polynomial(out)


def restrict(p: Polynomial, axis: int, value) -> Polynomial:
    """Substitute ``x_axis := value``; the result no longer depends on that axis."""
    v = as_fraction(value)
    out: dict[Exponent, Fraction] = {}
    for e, c in p.terms.items():
        ne = list(e)
        k = ne[axis]
        ne[axis] = 0
        ne = tuple(ne)
        out[ne] = out.get(ne, 0) + c * v**k
    return Polynomial(out)


def compose_affine(p: Polynomial, scale: Sequence, shift: Sequence) -> Polynomial:
    """Return ``q`` with ``q(x) = p(scale * x + shift)`` (componentwise)."""
    a = [as_fraction(s) for s in scale]
    b = [as_fraction(s) for s in shift]
    # expansions of (a x + b)^k per axis, cached
    powers = [dict() for _ in range(3)]

    def axis_power(axis, k):
        cache = powers[axis]
        if k not in cache:
            cache[k] = [comb(k, m) * a[axis] ** m * b[axis] ** (k - m) for m in range(k + 1)]
        return cache[k]

    out: dict[Exponent, Fraction] = {}
    for e, c in p.terms.items():
        c0, c1, c2 = (axis_power(ax, e[ax]) for ax in range(3))
        for m0, v0 in enumerate(c0):
            if not v0:
                continue
            for m1, v1 in enumerate(c1):
                if not v1:
                    continue
                for m2, v2 in enumerate(c2):
                    if v2:
                        key = (m0, m1, m2)
                        out[key] = out.get(key, 0) + c * v0 * v1 * v2
    return Polynomial(out)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo_1, hi_1] x [lo_2, hi_2] x [lo_3, hi_3]``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(as_fraction(v) for v in self.lo)
        hi = tuple(as_fraction(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("a box needs three lower and three upper bounds")
        if any(l >= h for l, h in zip(lo, hi)):
            raise ValueError(f"degenerate box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls) -> "Box":
        return cls((0, 0, 0), (1, 1, 1))

    @property
    def lengths(self) -> tuple:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def volume(self) -> Fraction:
        h = self.lengths
        return h[0] * h[1] * h[2]


def integrate_axes(p: Polynomial, bounds: Mapping[int, tuple]) -> Polynomial:
    """Integrate exactly over the given axes; ``bounds`` maps axis -> (lo, hi).

    The result is a polynomial in the remaining variables.
    """
    lims = {ax: (as_fraction(lo), as_fraction(hi)) for ax, (lo, hi) in bounds.items()}
    out: dict[Exponent, Fraction] = {}
    for e, c in p.terms.items():
        ne = list(e)
        for ax, (lo, hi) in lims.items():
            k = e[ax] + 1
            c = c * (hi**k - lo**k) / k
            ne[ax] = 0
        ne = tuple(ne)
        out[ne] = out.get(ne, 0) + c
    return Polynomial(out)


def integrate_box(p: Polynomial, box: Box) -> Fraction:
    """Exact integral of ``p`` over ``box``."""
    rest = integrate_axes(p, {ax: (box.lo[ax], box.hi[ax]) for ax in range(3)})
    return rest.terms.get((0, 0, 0), Fraction(0))


def monomial_values(points: np.ndarray, shape: Sequence[int] = (4, 4, 4)) -> np.ndarray:
    """Evaluate all monomials ``x^e`` with ``e < shape`` at ``points``.

    Returns an array of shape ``(npts,) + shape`` so that contracting with a
    dense coefficient array from :meth:`Polynomial.to_dense` evaluates the
    polynomial.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    p0 = pts[:, 0:1] ** np.arange(shape[0])
    p1 = pts[:, 1:2] ** np.arange(shape[1])
    p2 = pts[:, 2:3] ** np.arange(shape[2])
    return p0[:, :, None, None] * p1[:, None, :, None] * p2[:, None, None, :]


def span_rank(polys: Iterable[Polynomial]) -> int:
    """Exact rank of a family of polynomials (as coefficient vectors)."""
    from .exact import rank

    polys = list(polys)
    keys = sorted({e for p in polys for e in p.terms})
    rows = [[p.terms.get(e, Fraction(0)) for e in keys] for p in polys]
    return rank(rows) if rows else 0
