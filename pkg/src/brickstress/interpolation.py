"""Interpolation operators onto the discrete stress and displacement spaces.

* :func:`pi0_interpolate` -- edge moments set to zero, face and interior
  moments matched (well defined for H^1 fields).
* :func:`canonical_interpolate` -- every DOF matched (needs edge traces).
* :func:`clement_interpolate` -- continuous trilinear quasi-interpolant from
  vertex patch means.
* :func:`pih_interpolate` -- the composite ``Pi0 (I - R) + R``.
* :func:`project_displacement` -- cellwise L2 projection onto V_h.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from . import exact
from .assembly import QuadratureRule, Tabulation, pull_back, push_forward_displacement
from .mesh import BrickMesh, GlobalDofMap
from .polybox import Polynomial, integrate_box, monomial_values
from .ref_element import (
    EDGE,
    FACE_NN,
    FACE_NT,
    INTERIOR,
    MatrixPolynomial,
    ReferenceElement,
    VectorPolynomial,
    dof_apply,
)


class InterpolationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Fields


def _dense_shape(polys) -> tuple:
    deg = [0, 0, 0]
    for p in polys:
        for a, d in enumerate(p.degrees()):
            deg[a] = max(deg[a], d)
    return tuple(d + 1 for d in deg)


@dataclass
class StressField:
    """Symmetric matrix field with an optional exact polynomial representation.

    ``evaluate`` maps points ``(N, 3)`` to values ``(N, 3, 3)``; ``divergence``
    (optional) maps points to ``(N, 3)``.
    """

    evaluate: Callable
    divergence: Callable | None = None
    exact: MatrixPolynomial | None = None

    def __call__(self, x):
        return self.evaluate(np.atleast_2d(np.asarray(x, dtype=float)))

    @property
    def smoothness(self) -> str:
        return "polynomial" if self.exact is not None else "smooth"

    @classmethod
    def from_polynomial(cls, tau: MatrixPolynomial) -> "StressField":
        shape = _dense_shape(tau.symmetric_entries())
        coef = tau.to_dense(shape)
        div = tau.divergence()
        dshape = _dense_shape(div.entries)
        dcoef = div.to_dense(dshape)

        def evaluate(x):
            return np.einsum("ijxyz,qxyz->qij", coef, monomial_values(x, shape))

        def divergence(x):
            return np.einsum("ixyz,qxyz->qi", dcoef, monomial_values(x, dshape))

        return cls(evaluate, divergence, tau)

    @classmethod
    def constant(cls, value) -> "StressField":
        value = np.asarray(value, dtype=float)
        if not np.allclose(value, value.T, rtol=0, atol=0):
            raise ValueError("constant stress must be symmetric")
        return cls.from_polynomial(
            MatrixPolynomial([[Polynomial.constant(Fraction(float(value[i, j]))) for j in range(3)] for i in range(3)])
        )


@dataclass
class VectorField:
    evaluate: Callable
    exact: VectorPolynomial | None = None

    def __call__(self, x):
        return self.evaluate(np.atleast_2d(np.asarray(x, dtype=float)))

    @classmethod
    def from_polynomial(cls, v: VectorPolynomial) -> "VectorField":
        shape = _dense_shape(v.entries)
        coef = v.to_dense(shape)
        return cls(lambda x: np.einsum("ixyz,qxyz->qi", coef, monomial_values(x, shape)), v)


def as_stress_field(tau) -> StressField:
    if isinstance(tau, StressField):
        return tau
    if isinstance(tau, MatrixPolynomial):
        return StressField.from_polynomial(tau)
    if callable(tau):
        return StressField(tau)
    raise TypeError(f"cannot interpret {type(tau).__name__} as a stress field")


def as_vector_field(v) -> VectorField:
    if isinstance(v, VectorField):
        return v
    if isinstance(v, VectorPolynomial):
        return VectorField.from_polynomial(v)
    if callable(v):
        return VectorField(v)
    raise TypeError(f"cannot interpret {type(v).__name__} as a vector field")


def cell_points(mesh: BrickMesh, xhat: np.ndarray) -> np.ndarray:
    """Physical images ``(ncell, nq, 3)`` of reference points on every cell."""
    h = np.array([float(v) for v in mesh.h])
    return mesh.cell_offsets[:, None, :] + np.asarray(xhat)[None] * h


def evaluate_on_cells(field, mesh: BrickMesh, xhat: np.ndarray) -> np.ndarray:
    pts = cell_points(mesh, xhat)
    vals = np.asarray(field(pts.reshape(-1, 3)), dtype=float)
    return vals.reshape(pts.shape[:2] + vals.shape[1:])


# ---------------------------------------------------------------------------
# DOF evaluation by quadrature


class DofQuadrature:
    """Quadrature realization of every DOF functional of an element.

    ``values = W @ f`` where ``f[p]`` is the pulled-back target entry at
    ``points[p]``.
    """

    def __init__(self, element: ReferenceElement, quad: QuadratureRule):
        pts, owner, wts, targets = [], [], [], []
        for a, d in enumerate(element.dofs):
            fixed = dict(d.fixed)
            if d.kind == EDGE:
                (axis,) = d.free_axes
                p, w = quad.edge(axis, fixed)
            elif d.kind in (FACE_NN, FACE_NT):
                ((axis, side),) = d.fixed
                p, w = quad.face(axis, side)
            else:
                p, w = quad.points, quad.weights
            wf = np.einsum("xyz,qxyz->q", d.weight.to_dense((2, 2, 2)), monomial_values(p, (2, 2, 2)))
            pts.append(p)
            wts.append(w * wf)
            owner.append(np.full(len(p), a))
            targets.append(np.tile(d.target, (len(p), 1)))
        self.points = np.concatenate(pts)
        self.owner = np.concatenate(owner)
        self.targets = np.concatenate(targets)
        W = np.zeros((element.n_stress, len(self.points)))
        W[self.owner, np.arange(len(self.points))] = np.concatenate(wts)
        self.W = W

    def apply(self, mesh: BrickMesh, field) -> np.ndarray:
        """Reference DOF values ``(ncell, n)`` of a physical stress field."""
        vals = evaluate_on_cells(field, mesh, self.points)
        h = np.array([float(v) for v in mesh.h])
        ti, tj = self.targets[:, 0], self.targets[:, 1]
        picked = vals[:, np.arange(len(self.points)), ti, tj] / (h[ti] * h[tj])
        return picked @ self.W.T


_DOFQ_CACHE: dict = {}


def dof_quadrature(element: ReferenceElement, quad: QuadratureRule) -> DofQuadrature:
    key = (id(element), quad.order)
    hit = _DOFQ_CACHE.get(key)
    if hit is None or hit[0] is not element:
        hit = (element, DofQuadrature(element, quad))
        _DOFQ_CACHE[key] = hit
    return hit[1]


def _scatter_consistent(local: np.ndarray, dofmap: GlobalDofMap, tol: float) -> np.ndarray:
    """Gather cell DOF values into a global vector, insisting shared values agree."""
    n = dofmap.n_stress
    vals = (local * dofmap.signs).ravel()
    idx = dofmap.cell_dofs.ravel()
    out = np.zeros(n)
    out[idx] = vals
    spread = np.zeros(n)
    np.maximum.at(spread, idx, np.abs(vals - out[idx]))
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    worst = float(spread.max(initial=0.0))
    if worst > tol * scale:
        g = int(np.argmax(spread))
        raise InterpolationError(f"shared DOF {g} receives inconsistent values (spread {worst:.3e})")
    return out


def pi0_local_values(
    field,
    mesh: BrickMesh,
    element: ReferenceElement,
    quad: QuadratureRule = QuadratureRule(),
    match_tangential_xk: bool = True,
) -> np.ndarray:
    dq = dof_quadrature(element, quad)
    vals = dq.apply(mesh, as_stress_field(field))
    zero = element.dof_indices(EDGE)
    if not match_tangential_xk:
        zero += [a for a, d in enumerate(element.dofs) if d.kind == FACE_NT and d.weight.total_degree() > 0]
    vals[:, zero] = 0.0
    return vals


def pi0_interpolate(
    field,
    mesh: BrickMesh,
    element: ReferenceElement,
    dofmap: GlobalDofMap,
    quad: QuadratureRule = QuadratureRule(),
    match_tangential_xk: bool = True,
    tol: float = 1e-10,
) -> np.ndarray:
    """Global coefficients of the edge-free interpolant.

    Edge moments are zero; face normal-normal, face normal-tangential and
    interior moments reproduce those of the field.  With
    ``match_tangential_xk=False`` only the constant-weight tangential moments
    are matched and the ``x_k``-weighted ones are zeroed.
    """
    local = pi0_local_values(field, mesh, element, quad, match_tangential_xk)
    return _scatter_consistent(local, dofmap, tol)


def canonical_interpolate(
    field,
    mesh: BrickMesh,
    element: ReferenceElement,
    dofmap: GlobalDofMap,
    quad: QuadratureRule = QuadratureRule(),
    tol: float = 1e-10,
) -> np.ndarray:
    """Global coefficients matching every DOF of the field (edges included)."""
    local = dof_quadrature(element, quad).apply(mesh, as_stress_field(field))
    return _scatter_consistent(local, dofmap, tol)


# ---------------------------------------------------------------------------
# Clement-type regularizations


class ClementField:
    """Continuous trilinear field defined by vertex values on a brick mesh."""

    def __init__(self, mesh: BrickMesh, vertex_values: np.ndarray):
        self.mesh = mesh
        self.vertex_values = vertex_values  # (n1+1, n2+1, n3+1, 3, 3)

    def _locate(self, x):
        m = self.mesh
        lo = np.array([float(v) for v in m.domain.lo])
        h = np.array([float(v) for v in m.h])
        t = (np.atleast_2d(x) - lo) / h
        idx = np.clip(np.floor(t).astype(int), 0, np.array(m.n) - 1)
        return idx, t - idx

    def __call__(self, x):
        idx, loc = self._locate(x)
        out = 0.0
        for corner in np.ndindex(2, 2, 2):
            c = np.array(corner)
            w = np.prod(np.where(c, loc, 1 - loc), axis=1)
            v = self.vertex_values[idx[:, 0] + c[0], idx[:, 1] + c[1], idx[:, 2] + c[2]]
            out = out + w[:, None, None] * v
        return out

    def cell_polynomial(self, cell: int) -> MatrixPolynomial:
        """Trilinear representation in reference coordinates of ``cell``."""
        a, b, c = self.mesh.cell_multi_index(cell)
        entries = {}
        for i in range(3):
            for j in range(i, 3):
                p = Polynomial()
                for corner in np.ndindex(2, 2, 2):
                    f = Polynomial.constant(1)
                    for ax, s in enumerate(corner):
                        x = Polynomial.variable(ax)
                        f = f * (x if s else 1 - x)
                    val = self.vertex_values[a + corner[0], b + corner[1], c + corner[2], i, j]
                    p = p + f * Fraction(float(val))
                entries[(i, j)] = p
        return MatrixPolynomial(entries)


def cell_means(field, mesh: BrickMesh, quad: QuadratureRule = QuadratureRule()) -> np.ndarray:
    """Cell averages ``(n1, n2, n3, 3, 3)`` of a stress field."""
    vals = evaluate_on_cells(field, mesh, quad.points)
    means = np.einsum("q,cq...->c...", quad.weights, vals)
    return means.reshape(mesh.n + means.shape[1:])


def _patch_average(means: np.ndarray, axes=(0, 1, 2)) -> np.ndarray:
    """Average cell values over the cells touching each lattice node along ``axes``."""
    out = means
    for ax in axes:
        n = out.shape[ax]
        pad_shape = list(out.shape)
        pad_shape[ax] = n + 1
        total = np.zeros(pad_shape)
        count = np.zeros(n + 1)
        sl_lo = [slice(None)] * out.ndim
        sl_hi = [slice(None)] * out.ndim
        sl_lo[ax] = slice(0, n)
        sl_hi[ax] = slice(1, n + 1)
        total[tuple(sl_lo)] += out
        total[tuple(sl_hi)] += out
        count[:n] += 1
        count[1:] += 1
        shape = [1] * out.ndim
        shape[ax] = n + 1
        out = total / count.reshape(shape)
    return out


def clement_interpolate(field, mesh: BrickMesh, quad: QuadratureRule = QuadratureRule()) -> ClementField:
    """Continuous trilinear quasi-interpolant.

    Each vertex value is the mean of the field over the patch of cells
    sharing the vertex (equal volumes, so the average of the cell means).
    """
    means = cell_means(as_stress_field(field), mesh, quad)
    return ClementField(mesh, _patch_average(means))


def pih_interpolate(
    field,
    mesh: BrickMesh,
    element: ReferenceElement,
    dofmap: GlobalDofMap,
    quad: QuadratureRule = QuadratureRule(),
) -> np.ndarray:
    """Composite interpolant ``Pi0 (I - R) tau + I R tau``.

    ``R`` is the trilinear :func:`clement_interpolate`.  A continuous
    trilinear field is generally not in the stress space, so ``R tau`` enters
    through its canonical interpolant ``I``, which is well defined because
    ``R tau`` is continuous and coincides with ``R tau`` whenever it already
    lies in the space.  Both terms commute with the divergence.
    """
    tau = as_stress_field(field)
    reg = clement_interpolate(tau, mesh, quad)
    rest = StressField(lambda x: tau(x) - reg(x))
    return pi0_interpolate(rest, mesh, element, dofmap, quad) + canonical_interpolate(reg, mesh, element, dofmap, quad)


# ---------------------------------------------------------------------------
# Displacement projection


def local_mass(element: ReferenceElement, mesh: BrickMesh, quad: QuadratureRule) -> tuple[np.ndarray, Tabulation]:
    tab = Tabulation(element, quad.points, mesh.h)
    M = np.einsum("q,qci,qdi->cd", quad.weights * tab.det, tab.psi, tab.psi)
    return M, tab


def project_displacement(
    v, mesh: BrickMesh, element: ReferenceElement, quad: QuadratureRule = QuadratureRule()
) -> np.ndarray:
    """Cellwise L2 projection onto the displacement space; returns global coefficients."""
    M, tab = local_mass(element, mesh, quad)
    if np.linalg.cond(M) > 1e12:
        raise InterpolationError("local displacement mass matrix is singular")
    vals = evaluate_on_cells(as_vector_field(v), mesh, quad.points)
    rhs = np.einsum("q,cqi,qdi->cd", quad.weights * tab.det, vals, tab.psi)
    return np.linalg.solve(M, rhs.T).T.ravel()


# ---------------------------------------------------------------------------
# Diagnostics


def stress_values(coeffs: np.ndarray, mesh, element, dofmap, xhat) -> np.ndarray:
    tab = Tabulation(element, xhat, mesh.h)
    return tab.stress(coeffs[dofmap.cell_dofs] * dofmap.signs)


def divergence_values(coeffs: np.ndarray, mesh, element, dofmap, xhat) -> np.ndarray:
    tab = Tabulation(element, xhat, mesh.h)
    return tab.divergence(coeffs[dofmap.cell_dofs] * dofmap.signs)


def displacement_values(ucoeffs: np.ndarray, mesh, element, dofmap, xhat) -> np.ndarray:
    tab = Tabulation(element, xhat, mesh.h)
    return tab.displacement(ucoeffs[dofmap.cell_udofs])


def l2_norm(values: np.ndarray, mesh: BrickMesh, quad: QuadratureRule) -> float:
    """L2 norm of cellwise quadrature values ``(ncell, nq, ...)``."""
    vol = float(mesh.h[0] * mesh.h[1] * mesh.h[2])
    sq = (values**2).reshape(values.shape[0], values.shape[1], -1).sum(axis=-1)
    return float(np.sqrt(vol * np.einsum("q,cq->", quad.weights, sq)))


def commutativity_residual(
    field,
    mesh: BrickMesh,
    element: ReferenceElement,
    dofmap: GlobalDofMap,
    which: str = "pi0",
    quad: QuadratureRule = QuadratureRule(),
    match_tangential_xk: bool = True,
) -> float:
    """``|| div(Pi tau) - P_h div tau ||_0`` for ``which`` in ``{"pi0", "pih"}``."""
    tau = as_stress_field(field)
    if tau.divergence is None:
        raise ValueError("the field needs a divergence evaluator")
    if which == "pi0":
        coeffs = pi0_interpolate(tau, mesh, element, dofmap, quad, match_tangential_xk)
    elif which == "pih":
        coeffs = pih_interpolate(tau, mesh, element, dofmap, quad)
    else:
        raise ValueError(f"unknown interpolant {which!r}")
    div_pi = divergence_values(coeffs, mesh, element, dofmap, quad.points)
    proj = project_displacement(tau.divergence, mesh, element, quad)
    p_div = displacement_values(proj, mesh, element, dofmap, quad.points)
    return l2_norm(div_pi - p_div, mesh, quad)


# ---------------------------------------------------------------------------
# Exact-arithmetic path


def exact_projection(v: VectorPolynomial, mesh: BrickMesh, element: ReferenceElement, cell: int) -> VectorPolynomial:
    """Exact L2 projection of a polynomial vector field onto V(K)."""
    g = mesh.cell_geometry(cell)
    box = _cell_box(mesh, cell)
    basis = [push_forward_displacement(p, g) for p in element.displacement_basis]

    def inner(a, b):
        return integrate_box(sum((a[i] * b[i] for i in range(3)), Polynomial()), box)

    M = [[inner(a, b) for b in basis] for a in basis]
    rhs = [inner(v, a) for a in basis]
    coef = exact.solve(M, rhs)
    out = VectorPolynomial([Polynomial()] * 3)
    for c, b in zip(coef, basis):
        out = out + b * c
    return out


def _cell_box(mesh, cell):
    from .polybox import Box

    g = mesh.cell_geometry(cell)
    return Box(g.b, tuple(b + h for b, h in zip(g.b, g.h)))


def exact_pi0_cell(tau: MatrixPolynomial, mesh: BrickMesh, element: ReferenceElement, cell: int) -> tuple:
    """Exact ``Pi0`` on one cell: (reference DOF values, physical polynomial)."""
    from .assembly import piola_push_forward

    g = mesh.cell_geometry(cell)
    that = pull_back(tau, g)
    vals = [Fraction(0) if d.kind == EDGE else dof_apply(d, that) for d in element.dofs]
    out = MatrixPolynomial.zero()
    for v, phi in zip(vals, element.nodal_basis):
        if v:
            out = out + phi * v
    return vals, piola_push_forward(out, g)


def exact_commutativity_defects(
    tau: MatrixPolynomial, mesh: BrickMesh, element: ReferenceElement, dofmap: GlobalDofMap
) -> list[VectorPolynomial]:
    """Per-cell exact ``div(Pi0 tau) - P_h div tau``; all zero when the identity holds.

    Also checks that shared DOF values agree exactly between cells.
    """
    div_tau = tau.divergence()
    seen: dict = {}
    defects = []
    for c in range(mesh.n_cells):
        vals, pi = exact_pi0_cell(tau, mesh, element, c)
        for a, v in enumerate(vals):
            g = int(dofmap.cell_dofs[c, a])
            if seen.setdefault(g, v) != v:
                raise InterpolationError(f"shared DOF {g} differs between cells: {seen[g]} vs {v}")
        defects.append(pi.divergence() - exact_projection(div_tau, mesh, element, c))
    return defects
