"""Piola push-forward, isotropic compliance and saddle-point assembly.

The discrete system is

    [ A  B^T ] [sigma]   [ G ]
    [ B   0  ] [  u  ] = [ F ]

with ``A[a, b] = int A phi_a : phi_b``, ``B[c, b] = int div phi_b . psi_c``,
``F[c] = int f . psi_c`` and ``G[b] = int_{boundary} (phi_b n) . g`` for an
optional boundary displacement ``g`` (zero by default).

Stress shape functions map by ``tau(x) = B tau_hat(xh) B^T`` and displacement
shape functions by ``v(x) = B v_hat(xh)``, so ``div tau = B div_hat tau_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sps

from .mesh import BrickMesh, CellGeometry, GlobalDofMap
from .polybox import Polynomial, as_fraction, compose_affine, monomial_values
from .ref_element import RIGID, SYM_INDEX, MatrixPolynomial, ReferenceElement, VectorPolynomial, normalize_aspect

DEFAULT_QUAD_ORDER = 5


def _param(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return as_fraction(value)


@dataclass(frozen=True)
class MaterialModel:
    """Homogeneous isotropic material given by its Lame parameters."""

    lam: Fraction
    mu: Fraction

    def __post_init__(self):
        lam, mu = _param(self.lam), _param(self.mu)
        if mu <= 0:
            raise ValueError(f"shear modulus must be positive, got {mu}")
        if lam < 0:
            raise ValueError(f"first Lame parameter must be non-negative, got {lam}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_engineering(cls, E, nu) -> "MaterialModel":
        E, nu = _param(E), _param(nu)
        if not (0 <= nu <= Fraction(49, 100)):
            raise ValueError(f"Poisson ratio must lie in [0, 0.49], got {nu}")
        if E <= 0:
            raise ValueError("Young's modulus must be positive")
        return cls(E * nu / ((1 + nu) * (1 - 2 * nu)), E / (2 * (1 + nu)))

    @property
    def trace_factor(self) -> Fraction:
        return self.lam / (3 * self.lam + 2 * self.mu)

    def eigenvalue_bounds(self) -> tuple[float, float]:
        """Extreme eigenvalues of the compliance map on symmetric matrices."""
        dev = 1 / (2 * self.mu)
        vol = 1 / (3 * self.lam + 2 * self.mu)
        return float(min(dev, vol)), float(max(dev, vol))


def compliance_apply(m: MaterialModel, sigma: np.ndarray) -> np.ndarray:
    """``A sigma = (sigma - lam/(3 lam + 2 mu) tr(sigma) I) / (2 mu)`` on trailing 3x3 axes."""
    sigma = np.asarray(sigma, dtype=float)
    tr = np.trace(sigma, axis1=-2, axis2=-1)
    out = sigma - float(m.trace_factor) * tr[..., None, None] * np.eye(3)
    return out / float(2 * m.mu)


def stiffness_apply(m: MaterialModel, eps: np.ndarray) -> np.ndarray:
    """Inverse of :func:`compliance_apply`: ``2 mu eps + lam tr(eps) I``."""
    eps = np.asarray(eps, dtype=float)
    tr = np.trace(eps, axis1=-2, axis2=-1)
    return float(2 * m.mu) * eps + float(m.lam) * tr[..., None, None] * np.eye(3)


def compliance_apply_exact(m: MaterialModel, sigma: MatrixPolynomial) -> MatrixPolynomial:
    tr = sigma[0, 0] + sigma[1, 1] + sigma[2, 2]
    scale = 1 / (2 * m.mu)
    return MatrixPolynomial(
        {
            (i, j): (sigma[i, j] - (tr * m.trace_factor if i == j else Polynomial())) * scale
            for i, j in SYM_INDEX
        }
    )


def stiffness_apply_exact(m: MaterialModel, eps: MatrixPolynomial) -> MatrixPolynomial:
    tr = eps[0, 0] + eps[1, 1] + eps[2, 2]
    return MatrixPolynomial(
        {
            (i, j): eps[i, j] * (2 * m.mu) + (tr * m.lam if i == j else Polynomial())
            for i, j in SYM_INDEX
        }
    )


# ---------------------------------------------------------------------------
# Quadrature


@lru_cache(maxsize=None)
def gauss_unit(q: int) -> tuple[np.ndarray, np.ndarray]:
    """``q``-point Gauss-Legendre rule on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(q)
    return (x + 1) / 2, w / 2


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss rule with ``order`` points per axis on the unit cube.

    Exact for per-variable degree up to ``2 * order - 1``.
    """

    order: int = DEFAULT_QUAD_ORDER

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("quadrature order must be positive")

    @property
    def points(self) -> np.ndarray:
        x, _ = gauss_unit(self.order)
        g = np.meshgrid(x, x, x, indexing="ij")
        return np.stack([a.ravel() for a in g], axis=1)

    @property
    def weights(self) -> np.ndarray:
        _, w = gauss_unit(self.order)
        return np.einsum("i,j,k->ijk", w, w, w).ravel()

    def face(self, axis: int, side: float) -> tuple[np.ndarray, np.ndarray]:
        """Points on the reference face ``x_axis = side`` and their weights."""
        x, w = gauss_unit(self.order)
        a, b = [ax for ax in range(3) if ax != axis]
        ga, gb = np.meshgrid(x, x, indexing="ij")
        pts = np.zeros((ga.size, 3))
        pts[:, axis] = side
        pts[:, a] = ga.ravel()
        pts[:, b] = gb.ravel()
        return pts, np.outer(w, w).ravel()

    def edge(self, axis: int, fixed: dict) -> tuple[np.ndarray, np.ndarray]:
        x, w = gauss_unit(self.order)
        pts = np.zeros((x.size, 3))
        pts[:, axis] = x
        for ax, v in fixed.items():
            pts[:, ax] = v
        return pts, w.copy()


# ---------------------------------------------------------------------------
# Tabulation of the reference element


class Tabulation:
    """Nodal stress basis, its divergence and the displacement basis at
    reference points, already pushed forward with cell widths ``h``."""

    def __init__(self, element: ReferenceElement, points: np.ndarray, h):
        mono = monomial_values(points)
        hv = np.array([float(v) for v in h])
        self.points = np.asarray(points, dtype=float)
        self.h = hv
        self.det = float(np.prod(hv))
        scale = np.outer(hv, hv)
        self.phi = np.einsum("bijxyz,qxyz->qbij", element.stress_dense, mono) * scale
        self.div = np.einsum("bixyz,qxyz->qbi", element.divergence_dense, mono) * hv
        self.psi = np.einsum("cixyz,qxyz->qci", element.displacement_dense, mono) * hv

    def stress(self, local: np.ndarray) -> np.ndarray:
        """Values ``(ncell, nq, 3, 3)`` for local coefficients ``(ncell, nb)``."""
        return np.einsum("cb,qbij->cqij", local, self.phi)

    def divergence(self, local: np.ndarray) -> np.ndarray:
        return np.einsum("cb,qbi->cqi", local, self.div)

    def displacement(self, local: np.ndarray) -> np.ndarray:
        return np.einsum("cb,qbi->cqi", local, self.psi)


def piola_push_forward(tau_hat: MatrixPolynomial, g: CellGeometry) -> MatrixPolynomial:
    """``tau(x) = B tau_hat(F^{-1}(x)) B^T`` as an exact polynomial in ``x``."""
    inv = [1 / h for h in g.h]
    shift = [-b / h for b, h in zip(g.b, g.h)]
    return MatrixPolynomial(
        {(i, j): compose_affine(tau_hat[i, j], inv, shift) * (g.h[i] * g.h[j]) for i, j in SYM_INDEX}
    )


def push_forward_displacement(v_hat: VectorPolynomial, g: CellGeometry) -> VectorPolynomial:
    """``v(x) = B v_hat(F^{-1}(x))``."""
    inv = [1 / h for h in g.h]
    shift = [-b / h for b, h in zip(g.b, g.h)]
    return VectorPolynomial([compose_affine(v_hat[i], inv, shift) * g.h[i] for i in range(3)])


def pull_back(tau: MatrixPolynomial, g: CellGeometry) -> MatrixPolynomial:
    """Inverse Piola map: ``tau_hat(xh) = B^{-1} tau(F(xh)) B^{-T}``."""
    return MatrixPolynomial(
        {(i, j): compose_affine(tau[i, j], g.h, g.b) / (g.h[i] * g.h[j]) for i, j in SYM_INDEX}
    )


_LOCAL_CACHE: dict = {}


def local_matrices(
    element: ReferenceElement,
    g: CellGeometry,
    m: MaterialModel,
    quad: QuadratureRule = QuadratureRule(),
) -> tuple[np.ndarray, np.ndarray]:
    """Element matrices ``(A_K, B_K)`` of shapes ``(n, n)`` and ``(m, n)``.

    Cached per (element, cell widths, material, rule): uniform meshes need a
    single evaluation.
    """
    if quad.order < 4:
        raise ValueError("local matrices need at least 4 Gauss points per axis")
    key = (id(element), tuple(g.h), m, quad.order)
    hit = _LOCAL_CACHE.get(key)
    if hit is not None and hit[0] is element:
        return hit[1], hit[2]
    tab = Tabulation(element, quad.points, g.h)
    w = quad.weights * tab.det
    a_phi = compliance_apply(m, tab.phi)
    A = np.einsum("q,qaij,qbij->ab", w, a_phi, tab.phi)
    A = 0.5 * (A + A.T)
    Bk = np.einsum("q,qbi,qci->cb", w, tab.div, tab.psi)
    _LOCAL_CACHE[key] = (element, A, Bk)
    return A, Bk


@dataclass
class SaddleSystem:
    """Assembled saddle-point system (see module docstring)."""

    A: sps.csr_matrix
    B: sps.csr_matrix
    load: np.ndarray
    stress_rhs: np.ndarray
    n_stress: int
    n_displacement: int

    def matrix(self) -> sps.csr_matrix:
        return sps.bmat([[self.A, self.B.T], [self.B, None]], format="csr")

    def rhs(self) -> np.ndarray:
        return np.concatenate([self.stress_rhs, self.load])

    @property
    def size(self) -> int:
        return self.n_stress + self.n_displacement


def body_force_load(
    mesh: BrickMesh,
    dofmap: GlobalDofMap,
    element: ReferenceElement,
    f: Callable | None,
    quad: QuadratureRule = QuadratureRule(),
) -> np.ndarray:
    """``F[c] = int f . psi_c`` cell by cell."""
    out = np.zeros(dofmap.n_displacement)
    if f is None:
        return out
    tab = Tabulation(element, quad.points, mesh.h)
    pts = mesh.cell_offsets[:, None, :] + quad.points[None] * tab.h
    vals = np.asarray(f(pts.reshape(-1, 3)), dtype=float).reshape(mesh.n_cells, -1, 3)
    local = np.einsum("q,cqi,qbi->cb", quad.weights * tab.det, vals, tab.psi)
    np.add.at(out, dofmap.cell_udofs, local)
    return out


def boundary_faces(mesh: BrickMesh):
    """Yield ``(cell, axis, side)`` for every cell face on the domain boundary."""
    for c in range(mesh.n_cells):
        idx = mesh.cell_multi_index(c)
        for axis in range(3):
            if idx[axis] == 0:
                yield c, axis, 0
            if idx[axis] == mesh.n[axis] - 1:
                yield c, axis, 1


def boundary_displacement_load(
    mesh: BrickMesh,
    dofmap: GlobalDofMap,
    element: ReferenceElement,
    g: Callable | None,
    quad: QuadratureRule = QuadratureRule(),
) -> np.ndarray:
    """``G[b] = int_{boundary} (phi_b n) . g`` for a prescribed displacement ``g``."""
    out = np.zeros(dofmap.n_stress)
    if g is None:
        return out
    for c, axis, side in boundary_faces(mesh):
        pts, w = quad.face(axis, side)
        tab = Tabulation(element, pts, mesh.h)
        area = tab.det / tab.h[axis]
        x = mesh.cell_offsets[c] + pts * tab.h
        gv = np.asarray(g(x), dtype=float)
        normal_sign = 1.0 if side else -1.0
        # (phi n)_m = sign * phi[m, axis]
        local = normal_sign * area * np.einsum("q,qbm,qm->b", w, tab.phi[:, :, :, axis], gv)
        np.add.at(out, dofmap.cell_dofs[c], local * dofmap.signs[c])
    return out


def assemble_system(
    mesh: BrickMesh,
    dofmap: GlobalDofMap,
    element: ReferenceElement,
    m: MaterialModel,
    f: Callable | None = None,
    quad: QuadratureRule = QuadratureRule(),
    boundary_displacement: Callable | None = None,
) -> SaddleSystem:
    """Scatter local matrices in cell order and build the load vectors.

    ``f`` and ``boundary_displacement`` are vectorized callables mapping
    points ``(N, 3)`` to values ``(N, 3)``.
    """
    nb = element.n_stress
    nu = element.n_displacement
    if dofmap.cell_dofs.shape != (mesh.n_cells, nb):
        raise IndexError("DOF map does not match mesh and element")
    if dofmap.cell_dofs.max(initial=-1) >= dofmap.n_stress or dofmap.cell_dofs.min(initial=0) < 0:
        raise IndexError("stress DOF index out of range")
    if element.variant == RIGID and normalize_aspect(mesh.h) != element.aspect:
        raise ValueError(f"rigid element built for aspect {element.aspect}, mesh cells have widths {mesh.h}")
    geom = mesh.cell_geometry(0)
    Ak, Bk = local_matrices(element, geom, m, quad)
    s = dofmap.signs
    rows = np.repeat(dofmap.cell_dofs, nb, axis=1).ravel()
    cols = np.tile(dofmap.cell_dofs, (1, nb)).ravel()
    vals = (s[:, :, None] * Ak[None] * s[:, None, :]).ravel()
    A = sps.coo_matrix((vals, (rows, cols)), shape=(dofmap.n_stress,) * 2).tocsr()
    brows = np.repeat(dofmap.cell_udofs, nb, axis=1).ravel()
    bcols = np.tile(dofmap.cell_dofs, (1, nu)).ravel()
    bvals = (Bk[None] * s[:, None, :]).ravel()
    B = sps.coo_matrix((bvals, (brows, bcols)), shape=(dofmap.n_displacement, dofmap.n_stress)).tocsr()
    return SaddleSystem(
        A=A,
        B=B,
        load=body_force_load(mesh, dofmap, element, f, quad),
        stress_rhs=boundary_displacement_load(mesh, dofmap, element, boundary_displacement, quad),
        n_stress=dofmap.n_stress,
        n_displacement=dofmap.n_displacement,
    )


def write_system_coo(system: SaddleSystem, path) -> None:
    """Plain-text ``row col value`` dump of the full matrix, then the rhs."""
    K = system.matrix().tocoo()
    order = np.lexsort((K.col, K.row))
    with open(path, "w") as fh:
        fh.write(f"# saddle system {system.size} x {system.size}, nnz {K.nnz}\n")
        for r, c, v in zip(K.row[order], K.col[order], K.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
        fh.write("# rhs\n")
        for i, v in enumerate(system.rhs()):
            fh.write(f"{i} {v:.17g}\n")
