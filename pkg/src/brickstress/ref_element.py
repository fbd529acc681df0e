"""Reference-cube stress/displacement element.

The conforming stress space on the unit cube is the 54-dimensional
nonconforming tensor-product space plus 24 divergence-free generators built
from the four plane generators.  Its 78 degrees of freedom are edge moments,
face normal-normal moments, face normal-tangential moments and interior
moments.  The rigid variant keeps the first three DOF families (72) and uses
rigid body motions for the displacement.

All shape functions are exact :class:`~brickstress.polybox.Polynomial`
matrices; the DOF matrix and its inverse are exact rational matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import exact
from .polybox import Polynomial, as_fraction, integrate_axes, restrict

FULL = "conforming-full"
RIGID = "conforming-rigid"
NCF = "nonconforming"
VARIANTS = (FULL, RIGID, NCF)
VARIANT_ALIASES = {"full": FULL, "rigid": RIGID, "ncf": NCF, "nonconforming": NCF}

PAIRS = ((0, 1), (0, 2), (1, 2))
SYM_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))

# Per-entry degree bounds of S_2 (the space containing every stress shape function).
S2_BOUNDS = {
    (0, 0): (3, 1, 1),
    (1, 1): (1, 3, 1),
    (2, 2): (1, 1, 3),
    (0, 1): (2, 2, 1),
    (0, 2): (2, 1, 2),
    (1, 2): (1, 2, 2),
}
# Degree bounds of the divergence image of S_2 and of V = P011 x P101 x P110.
DIV_S2_BOUNDS = ((2, 1, 1), (1, 2, 1), (1, 1, 2))
V_BOUNDS = ((0, 1, 1), (1, 0, 1), (1, 1, 0))

DENSE_SHAPE = (4, 4, 4)


class ElementConstructionError(RuntimeError):
    """A constructed basis violates a structural requirement."""


def resolve_variant(name: str) -> str:
    name = VARIANT_ALIASES.get(name, name)
    if name not in VARIANTS:
        raise ValueError(f"unknown variant {name!r}; expected one of {VARIANTS}")
    return name


def third_axis(i: int, j: int) -> int:
    return 3 - i - j


def _mono(*exps) -> Polynomial:
    return Polynomial.monomial(exps)


def _exps(powers: dict) -> tuple:
    e = [0, 0, 0]
    for ax, k in powers.items():
        e[ax] = k
    return tuple(e)


class MatrixPolynomial:
    """Symmetric 3x3 matrix of polynomials."""

    __slots__ = ("_sym",)

    def __init__(self, entries: dict | Sequence):
        if isinstance(entries, dict):
            sym = []
            for i, j in SYM_INDEX:
                a = entries.get((i, j))
                b = entries.get((j, i))
                if a is not None and b is not None and a != b:
                    raise ValueError(f"entries ({i},{j}) and ({j},{i}) differ")
                val = a if a is not None else b
                sym.append(val if val is not None else Polynomial())
        else:
            rows = [list(r) for r in entries]
            for i in range(3):
                for j in range(i + 1, 3):
                    if rows[i][j] != rows[j][i]:
                        raise ValueError(f"matrix is not symmetric at ({i},{j})")
            sym = [rows[i][j] for i, j in SYM_INDEX]
        self._sym = tuple(p if isinstance(p, Polynomial) else Polynomial.constant(p) for p in sym)

    @classmethod
    def zero(cls) -> "MatrixPolynomial":
        return cls({})

    def __getitem__(self, ij) -> Polynomial:
        i, j = ij
        if i > j:
            i, j = j, i
        return self._sym[SYM_INDEX.index((i, j))]

    def rows(self) -> list[list[Polynomial]]:
        return [[self[i, j] for j in range(3)] for i in range(3)]

    def symmetric_entries(self) -> tuple:
        return self._sym

    def is_symmetric(self) -> bool:
        rows = self.rows()
        return all(rows[i][j] == rows[j][i] for i in range(3) for j in range(3))

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        return MatrixPolynomial(dict(zip(SYM_INDEX, (a + b for a, b in zip(self._sym, other._sym)))))

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, scalar) -> "MatrixPolynomial":
        return MatrixPolynomial(dict(zip(SYM_INDEX, (a * scalar for a in self._sym))))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, MatrixPolynomial) and self._sym == other._sym

    def __hash__(self):
        return hash(self._sym)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self._sym)

    def divergence(self) -> "VectorPolynomial":
        """Row-wise divergence."""
        return VectorPolynomial(
            [sum((self[i, j].derivative(j) for j in range(3)), Polynomial()) for i in range(3)]
        )

    def map_entries(self, fn) -> "MatrixPolynomial":
        return MatrixPolynomial(dict(zip(SYM_INDEX, (fn(p) for p in self._sym))))

    def to_dense(self, shape=DENSE_SHAPE) -> np.ndarray:
        out = np.zeros((3, 3) + tuple(shape))
        for i in range(3):
            for j in range(3):
                out[i, j] = self[i, j].to_dense(shape)
        return out

    def __repr__(self):
        return f"MatrixPolynomial({self.rows()!r})"


class VectorPolynomial:
    """Vector of three polynomials."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence):
        if len(entries) != 3:
            raise ValueError("a vector polynomial has three components")
        self.entries = tuple(p if isinstance(p, Polynomial) else Polynomial.constant(p) for p in entries)

    def __getitem__(self, i) -> Polynomial:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __add__(self, other):
        return VectorPolynomial([a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        return VectorPolynomial([a - b for a, b in zip(self.entries, other.entries)])

    def __mul__(self, scalar):
        return VectorPolynomial([a * scalar for a in self.entries])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, VectorPolynomial) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.entries)

    def strain(self) -> MatrixPolynomial:
        """Symmetric gradient ``(grad v + grad v^T) / 2``."""
        half = Fraction(1, 2)
        return MatrixPolynomial(
            {
                (i, j): (self[i].derivative(j) + self[j].derivative(i)) * half
                for i, j in SYM_INDEX
            }
        )

    def to_dense(self, shape=DENSE_SHAPE) -> np.ndarray:
        return np.stack([p.to_dense(shape) for p in self.entries])

    def __repr__(self):
        return f"VectorPolynomial({list(self.entries)!r})"


# ---------------------------------------------------------------------------
# Shape functions


def ncf_offdiag_monomials(i: int, j: int) -> list[tuple]:
    """Exponents spanning the 10-dimensional tensor-product space for entry (i, j)."""
    k = third_axis(i, j)
    out = []
    for c in (0, 1):
        for a, b in ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2)):
            e = [0, 0, 0]
            e[i], e[j], e[k] = a, b, c
            out.append(tuple(e))
    return out


def build_ncf_stress_basis() -> list[MatrixPolynomial]:
    """The 54 nonconforming shape functions: P111 diagonals, tensor-product off-diagonals."""
    basis = []
    for i in range(3):
        for e in product((0, 1), repeat=3):
            basis.append(MatrixPolynomial({(i, i): _mono(*e)}))
    for i, j in PAIRS:
        for e in ncf_offdiag_monomials(i, j):
            basis.append(MatrixPolynomial({(i, j): _mono(*e)}))
    return basis


def plane_generators() -> list[tuple[dict, dict, dict]]:
    """The four divergence-free plane generators, as exponent->coefficient maps
    in the variables (s, t) for the entries (ss, st, tt)."""
    F = Fraction
    return [
        ({(2, 0): F(-1, 2)}, {(1, 1): F(1)}, {(0, 2): F(-1, 2)}),
        ({(3, 0): F(-1, 3)}, {(2, 1): F(1)}, {(1, 2): F(-1)}),
        ({(2, 1): F(-1)}, {(1, 2): F(1)}, {(0, 3): F(-1, 3)}),
        ({(3, 1): F(-2, 3)}, {(2, 2): F(1)}, {(1, 3): F(-2, 3)}),
    ]


def _embed(plane: dict, i: int, j: int, k_power: int) -> Polynomial:
    k = third_axis(i, j)
    terms = {}
    for (a, b), c in plane.items():
        e = [0, 0, 0]
        e[i], e[j], e[k] = a, b, k_power
        terms[tuple(e)] = c
    return Polynomial(terms)


def build_extra_generators() -> list[MatrixPolynomial]:
    """The 24 divergence-free generators, ordered by pair then (generator, {1, x_k}).

    Raises :class:`ElementConstructionError` if a generator is not exactly
    divergence free.
    """
    out = []
    for i, j in PAIRS:
        for ss, st, tt in plane_generators():
            for kp in (0, 1):
                m = MatrixPolynomial(
                    {
                        (i, i): _embed(ss, i, j, kp),
                        (i, j): _embed(st, i, j, kp),
                        (j, j): _embed(tt, i, j, kp),
                    }
                )
                if not m.divergence().is_zero():
                    raise ElementConstructionError(
                        f"generator for pair {(i + 1, j + 1)} has nonzero divergence"
                    )
                out.append(m)
    return out


def extra_generator(i: int, j: int, k: int) -> MatrixPolynomial:
    """Generator number ``k`` (1..8) for the 1-based pair ``(i, j)``."""
    pair = PAIRS.index((i - 1, j - 1))
    return build_extra_generators()[8 * pair + k - 1]


def build_displacement_basis(variant: str, aspect: Sequence = (1, 1, 1)) -> list[VectorPolynomial]:
    """Displacement shape functions on the reference cube.

    Full/nonconforming: component ``i`` spans ``{1, x_j, x_k, x_j x_k}``.
    Rigid: translations and the rotations ``B^{-1}(e_m x B x)`` with
    ``B = diag(aspect)``, which push forward to physical rigid motions.
    """
    variant = resolve_variant(variant)
    if variant in (FULL, NCF):
        out = []
        for i in range(3):
            j, k = [a for a in range(3) if a != i]
            for e in ((0, 0, 0), _exps({j: 1}), _exps({k: 1}), _exps({j: 1, k: 1})):
                comps = [Polynomial(), Polynomial(), Polynomial()]
                comps[i] = Polynomial.monomial(e)
                out.append(VectorPolynomial(comps))
        return out
    h = [as_fraction(a) for a in aspect]
    out = []
    for i in range(3):
        comps = [Polynomial(), Polynomial(), Polynomial()]
        comps[i] = Polynomial.constant(1)
        out.append(VectorPolynomial(comps))
    for m in range(3):
        # e_m x y with y = B x, then divide component i by h_i
        a, b = [ax for ax in range(3) if ax != m]
        sign = 1 if (m, a, b) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
        # (e_m x y)_a = -sign * y_b,  (e_m x y)_b = sign * y_a
        comps = [Polynomial(), Polynomial(), Polynomial()]
        comps[a] = Polynomial.variable(b) * (-sign * h[b] / h[a])
        comps[b] = Polynomial.variable(a) * (sign * h[a] / h[b])
        out.append(VectorPolynomial(comps))
    return out


# ---------------------------------------------------------------------------
# Degrees of freedom

EDGE, FACE_NN, FACE_NT, INTERIOR = "edge", "face-nn", "face-nt", "interior"
DOF_KINDS = (EDGE, FACE_NN, FACE_NT, INTERIOR)
_LOCUS_DIM = {EDGE: 1, FACE_NN: 2, FACE_NT: 2, INTERIOR: 3}


@dataclass(frozen=True)
class DofFunctional:
    """Moment of one stress entry against a weight over an edge, face or the cell.

    ``fixed`` lists ``(axis, value)`` pairs defining the locus on the
    reference cube; the weight is a polynomial in the free axes.
    """

    kind: str
    fixed: tuple
    weight: Polynomial
    target: tuple

    def __post_init__(self):
        if self.kind not in DOF_KINDS:
            raise ValueError(f"unknown DOF kind {self.kind!r}")
        if 3 - len(self.fixed) != _LOCUS_DIM[self.kind]:
            raise ValueError(f"{self.kind} DOF needs a {_LOCUS_DIM[self.kind]}-dimensional locus")
        fixed_axes = {ax for ax, _ in self.fixed}
        if any(e[ax] for e in self.weight.terms for ax in fixed_axes):
            raise ValueError("DOF weight depends on a fixed coordinate")

    @property
    def free_axes(self) -> tuple:
        fixed_axes = {ax for ax, _ in self.fixed}
        return tuple(a for a in range(3) if a not in fixed_axes)

    @property
    def locus_dimension(self) -> int:
        return _LOCUS_DIM[self.kind]

    def apply(self, tau: MatrixPolynomial) -> Fraction:
        return dof_apply(self, tau)


def dof_apply(d: DofFunctional, tau: MatrixPolynomial) -> Fraction:
    """Exact moment of ``tau[target]`` against the weight over the locus."""
    p = tau[d.target]
    for ax, val in d.fixed:
        p = restrict(p, ax, val)
    p = p * d.weight
    rest = integrate_axes(p, {ax: (0, 1) for ax in d.free_axes})
    return rest.terms.get((0, 0, 0), Fraction(0))


def _weights_1_xk(k: int) -> list[Polynomial]:
    return [Polynomial.constant(1), Polynomial.variable(k)]


def face_nn_weights(l: int, k: int) -> list[Polynomial]:
    xl, xk = Polynomial.variable(l), Polynomial.variable(k)
    return [Polynomial.constant(1), xl, xk, xl * xk]


def build_dof_set(variant: str) -> list[DofFunctional]:
    """Ordered DOF list: edges, face normal-normal, face normal-tangential, interior."""
    variant = resolve_variant(variant)
    if variant == NCF:
        raise ValueError("the nonconforming space is built for its shape functions only")
    dofs = []
    for i, j in PAIRS:
        k = third_axis(i, j)
        for s, t in product((0, 1), repeat=2):
            for w in _weights_1_xk(k):
                dofs.append(DofFunctional(EDGE, ((i, s), (j, t)), w, (i, j)))
    for i in range(3):
        l, k = [a for a in range(3) if a != i]
        for side in (0, 1):
            for w in face_nn_weights(l, k):
                dofs.append(DofFunctional(FACE_NN, ((i, side),), w, (i, i)))
    for i, j in PAIRS:
        k = third_axis(i, j)
        for l in (i, j):
            for side in (0, 1):
                for w in _weights_1_xk(k):
                    dofs.append(DofFunctional(FACE_NT, ((l, side),), w, (i, j)))
    if variant == FULL:
        for i, j in PAIRS:
            k = third_axis(i, j)
            for w in _weights_1_xk(k):
                dofs.append(DofFunctional(INTERIOR, (), w, (i, j)))
    return dofs


# ---------------------------------------------------------------------------
# Divergence-constraint bookkeeping


def _coords(poly: Polynomial, keys: Sequence[tuple]) -> list[Fraction]:
    extra = set(poly.terms) - set(keys)
    if extra:
        raise ValueError(f"polynomial has terms {sorted(extra)} outside the coordinate system")
    return [poly.terms.get(k, Fraction(0)) for k in keys]


def bounded_monomials(bounds: Sequence[int]) -> list[tuple]:
    return list(product(*(range(b + 1) for b in bounds)))


def vector_coords(v: VectorPolynomial, bounds=DIV_S2_BOUNDS) -> list[Fraction]:
    out = []
    for c in range(3):
        out.extend(_coords(v[c], bounded_monomials(bounds[c])))
    return out


def s2_basis() -> list[MatrixPolynomial]:
    """Monomial basis of S_2 (102 members)."""
    out = []
    for ij, bounds in S2_BOUNDS.items():
        for e in bounded_monomials(bounds):
            out.append(MatrixPolynomial({ij: Polynomial.monomial(e)}))
    return out


def in_s2(tau: MatrixPolynomial) -> bool:
    return all(tau[ij].fits(b) for ij, b in S2_BOUNDS.items())


def div_in_space(tau: MatrixPolynomial, space: Sequence[VectorPolynomial]) -> bool:
    """Exact membership test of ``div tau`` in ``span(space)``."""
    d = tau.divergence()
    if d.is_zero():
        return True
    base = [vector_coords(v) for v in space]
    return exact.rank(base + [vector_coords(d)]) == exact.rank(base)


def _complete_rigid(ncf: list[MatrixPolynomial], rigid: list[VectorPolynomial]) -> list[MatrixPolynomial]:
    """Members of span(ncf) whose divergence lies in span(rigid) (exact nullspace)."""
    div_cols = [vector_coords(m.divergence()) for m in ncf]
    rig_cols = [vector_coords(v) for v in rigid]
    ncols = len(ncf) + len(rigid)
    rows = [[div_cols[c][r] for c in range(len(ncf))] + [-rig_cols[c][r] for c in range(len(rigid))]
            for r in range(len(div_cols[0]))]
    null = exact.nullspace(rows, ncols)
    out = []
    for vec in null:
        m = MatrixPolynomial.zero()
        for c, coef in enumerate(vec[: len(ncf)]):
            if coef:
                m = m + ncf[c] * coef
        out.append(m)
    return out


def build_stress_basis(variant: str, aspect: Sequence = (1, 1, 1)) -> tuple[list[MatrixPolynomial], list[str]]:
    """Stress shape functions with a provenance label per member.

    Labels are ``"ncf"`` (tensor-product member), ``"extra"`` (divergence-free
    generator) or ``"rigid"`` (nullspace completion of the rigid variant).
    """
    variant = resolve_variant(variant)
    ncf = build_ncf_stress_basis()
    if variant == NCF:
        basis, labels = ncf, ["ncf"] * len(ncf)
        expected = 54
    elif variant == FULL:
        extras = build_extra_generators()
        basis, labels = ncf + extras, ["ncf"] * 54 + ["extra"] * 24
        expected = 78
    else:
        extras = build_extra_generators()
        completion = _complete_rigid(ncf, build_displacement_basis(RIGID, aspect))
        basis, labels = extras + completion, ["extra"] * 24 + ["rigid"] * len(completion)
        expected = 72
    if len(basis) != expected:
        raise ElementConstructionError(f"{variant}: expected {expected} stress shape functions, got {len(basis)}")
    return basis, labels


# ---------------------------------------------------------------------------
# The element


@dataclass
class UnisolvencyReport:
    matrix: list
    rank: int
    determinant: Fraction
    null_vector: list | None = None

    @property
    def nonsingular(self) -> bool:
        return self.rank == len(self.matrix)


def dof_matrix(dofs: Sequence[DofFunctional], basis: Sequence[MatrixPolynomial]) -> list[list[Fraction]]:
    return [[dof_apply(d, b) for b in basis] for d in dofs]


def unisolvency_matrix(variant: str, aspect: Sequence = (1, 1, 1)) -> UnisolvencyReport:
    """DOF-on-basis matrix decided nonsingular by exact elimination."""
    basis, _ = build_stress_basis(variant, aspect)
    return unisolvency_report(build_dof_set(variant), basis)


def unisolvency_report(dofs, basis) -> UnisolvencyReport:
    m = dof_matrix(dofs, basis)
    if len(m) != len(basis):
        raise ElementConstructionError(f"{len(m)} DOFs for {len(basis)} shape functions")
    _, pivots = exact.rref(m)
    r = len(pivots)
    det = exact.determinant(m) if r == len(m) else Fraction(0)
    null = None
    if r < len(m):
        null = exact.nullspace(m)[0]
    return UnisolvencyReport(m, r, det, null)


class ReferenceElement:
    """Reference-cube element with exact nodal (dual) basis.

    ``nodal_basis[b]`` satisfies ``dofs[a].apply(nodal_basis[b]) == (a == b)``.
    """

    def __init__(
        self,
        variant: str,
        stress_basis: Sequence[MatrixPolynomial],
        stress_labels: Sequence[str],
        displacement_basis: Sequence[VectorPolynomial],
        dofs: Sequence[DofFunctional],
        nodal_matrix: Sequence[Sequence[Fraction]] | None = None,
        aspect: Sequence = (1, 1, 1),
    ):
        self.variant = resolve_variant(variant)
        self.aspect = tuple(as_fraction(a) for a in aspect)
        self.stress_basis = list(stress_basis)
        self.stress_labels = list(stress_labels)
        self.displacement_basis = list(displacement_basis)
        self.dofs = list(dofs)
        if len(self.stress_basis) != len(self.dofs):
            raise ElementConstructionError(
                f"{len(self.dofs)} DOFs for {len(self.stress_basis)} stress shape functions"
            )
        if nodal_matrix is None:
            report = unisolvency_report(self.dofs, self.stress_basis)
            if not report.nonsingular:
                raise exact.SingularMatrixError(
                    f"DOF matrix of {self.variant} has rank {report.rank} < {len(self.dofs)}",
                    report.null_vector,
                )
            self.determinant = report.determinant
            nodal_matrix = exact.inverse(report.matrix)
        else:
            self.determinant = None
        self.nodal_matrix = [list(r) for r in nodal_matrix]

    @property
    def n_stress(self) -> int:
        return len(self.dofs)

    @property
    def n_displacement(self) -> int:
        return len(self.displacement_basis)

    @cached_property
    def nodal_basis(self) -> list[MatrixPolynomial]:
        n = self.n_stress
        out = []
        for b in range(n):
            sym = []
            for idx in range(6):
                acc: dict = {}
                for c in range(n):
                    coef = self.nodal_matrix[c][b]
                    if coef:
                        for e, v in self.stress_basis[c].symmetric_entries()[idx].terms.items():
                            acc[e] = acc.get(e, 0) + coef * v
                sym.append(Polynomial(acc))
            out.append(MatrixPolynomial(dict(zip(SYM_INDEX, sym))))
        return out

    # dense float data for assembly
    @cached_property
    def stress_dense(self) -> np.ndarray:
        """Nodal stress basis coefficients, shape ``(n, 3, 3, 4, 4, 4)``."""
        raw = np.stack([m.to_dense() for m in self.stress_basis])
        t = np.array([[float(v) for v in row] for row in self.nodal_matrix])
        return np.einsum("cb,c...->b...", t, raw)

    @cached_property
    def divergence_dense(self) -> np.ndarray:
        """Reference divergence of the nodal basis, shape ``(n, 3, 4, 4, 4)``."""
        c = self.stress_dense
        out = np.zeros(c.shape[:1] + (3,) + c.shape[3:])
        for i in range(3):
            for j in range(3):
                d = np.moveaxis(c[:, i, j], j + 1, -1)[..., 1:] * np.arange(1, c.shape[3 + j])
                d = np.concatenate([d, np.zeros(d.shape[:-1] + (1,))], axis=-1)
                out[:, i] += np.moveaxis(d, -1, j + 1)
        return out

    @cached_property
    def displacement_dense(self) -> np.ndarray:
        """Displacement basis coefficients, shape ``(m, 3, 4, 4, 4)``."""
        return np.stack([v.to_dense() for v in self.displacement_basis])

    def dof_indices(self, kind: str) -> list[int]:
        return [a for a, d in enumerate(self.dofs) if d.kind == kind]

    def __repr__(self):
        return f"ReferenceElement({self.variant!r}, stress={self.n_stress}, displacement={self.n_displacement})"


@lru_cache(maxsize=None)
def _cached_element(variant: str, aspect: tuple) -> ReferenceElement:
    basis, labels = build_stress_basis(variant, aspect)
    return ReferenceElement(
        variant,
        basis,
        labels,
        build_displacement_basis(variant, aspect),
        build_dof_set(variant),
        aspect=aspect,
    )


def normalize_aspect(aspect: Sequence) -> tuple:
    h = [as_fraction(a) for a in aspect]
    return tuple(v / h[0] for v in h)


def nodal_basis(variant: str, aspect: Sequence = (1, 1, 1)) -> ReferenceElement:
    """Build (and cache) the reference element for ``variant``.

    ``aspect`` only matters for the rigid variant, whose reference
    displacement space depends on the cell's edge-length ratios.
    """
    variant = resolve_variant(variant)
    if variant == NCF:
        raise ValueError("no DOF set for the nonconforming space")
    key = normalize_aspect(aspect) if variant == RIGID else (Fraction(1),) * 3
    return _cached_element(variant, key)


reference_element = nodal_basis
