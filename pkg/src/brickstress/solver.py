"""Direct solution of the saddle-point system, manufactured solutions, error
norms and refinement studies."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla
import sympy

from .assembly import MaterialModel, QuadratureRule, SaddleSystem, Tabulation, assemble_system, local_matrices
from .interpolation import (
    StressField,
    VectorField,
    cell_points,
    divergence_values,
    displacement_values,
    evaluate_on_cells,
    l2_norm,
    local_mass,
    project_displacement,
    stress_values,
)
from .mesh import BrickMesh, GlobalDofMap, global_dof_map, unit_cube_mesh
from .polybox import Box, Polynomial, monomial_values
from .ref_element import SYM_INDEX, MatrixPolynomial, ReferenceElement, VectorPolynomial, nodal_basis

DENSE_THRESHOLD = 2000
RESIDUAL_TOL = 1e-9


class SolverError(RuntimeError):
    pass


def element_for(mesh: BrickMesh, variant: str) -> ReferenceElement:
    """Reference element matching the cell shape of ``mesh``."""
    return nodal_basis(variant, mesh.h)


# ---------------------------------------------------------------------------
# Linear solve


@dataclass
class MixedSolution:
    sigma: np.ndarray
    u: np.ndarray
    residual: float
    method: str

    @property
    def n_stress(self) -> int:
        return self.sigma.size

    @property
    def n_displacement(self) -> int:
        return self.u.size


def _diagnose(system: SaddleSystem) -> str:
    if system.n_displacement <= 4000:
        r = np.linalg.matrix_rank(system.B.toarray())
        if r < system.n_displacement:
            return f"B block is rank deficient (rank {r} < {system.n_displacement})"
    return "A block or coupled system is singular"


def solve_saddle(system: SaddleSystem, dense_threshold: int = DENSE_THRESHOLD, tol: float = RESIDUAL_TOL) -> MixedSolution:
    """Direct solve with a relative residual check.

    Small systems use a dense symmetric-indefinite (Bunch-Kaufman)
    factorization; larger ones a sparse LU with partial pivoting.
    """
    K = system.matrix()
    rhs = system.rhs()
    ns = system.n_stress
    try:
        if system.size < dense_threshold:
            method = "dense-sym"
            x = sla.solve(K.toarray(), rhs, assume_a="sym")
        else:
            method = "sparse-lu"
            x = spla.splu(sps.csc_matrix(K)).solve(rhs)
    except (np.linalg.LinAlgError, RuntimeError, sla.LinAlgWarning) as exc:
        raise SolverError(f"factorization failed: {_diagnose(system)}") from exc
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    res = float(np.linalg.norm(K @ x - rhs))
    rel = res / scale if np.linalg.norm(rhs) > 0 else res
    if not np.all(np.isfinite(x)) or rel > tol:
        raise SolverError(f"residual {rel:.2e} exceeds {tol:.0e}: {_diagnose(system)}")
    return MixedSolution(x[:ns], x[ns:], rel, method)


# ---------------------------------------------------------------------------
# Manufactured solutions


@dataclass
class ManufacturedCase:
    """Exact solution of ``A sigma = eps(u)``, ``div sigma = f`` on the unit cube.

    ``boundary`` is the displacement trace to impose weakly; ``None`` means
    ``u = 0`` on the boundary.
    """

    name: str
    material: MaterialModel
    u: VectorField
    sigma: StressField
    f: VectorField
    boundary: Callable | None = None
    u_exact: VectorPolynomial | None = None
    sigma_exact: MatrixPolynomial | None = None
    f_exact: VectorPolynomial | None = None

    @property
    def div_sigma(self) -> VectorField:
        return self.f


def stress_from_strain_exact(m: MaterialModel, eps: MatrixPolynomial) -> MatrixPolynomial:
    tr = eps[0, 0] + eps[1, 1] + eps[2, 2]
    return MatrixPolynomial(
        {(i, j): eps[i, j] * (2 * m.mu) + (tr * m.lam if i == j else Polynomial()) for i, j in SYM_INDEX}
    )


def _polynomial_case(name, m: MaterialModel, u: VectorPolynomial, boundary: bool) -> ManufacturedCase:
    sigma = stress_from_strain_exact(m, u.strain())
    f = sigma.divergence()
    uf = VectorField.from_polynomial(u)
    return ManufacturedCase(
        name,
        m,
        uf,
        StressField.from_polynomial(sigma),
        VectorField.from_polynomial(f),
        uf.evaluate if boundary else None,
        u,
        sigma,
        f,
    )


def _sympy_case(name, m: MaterialModel, exprs, xs) -> ManufacturedCase:
    lam, mu = sympy.Rational(m.lam.numerator, m.lam.denominator), sympy.Rational(m.mu.numerator, m.mu.denominator)
    grad = sympy.Matrix(3, 3, lambda i, j: sympy.diff(exprs[i], xs[j]))
    eps = (grad + grad.T) / 2
    sigma = 2 * mu * eps + lam * eps.trace() * sympy.eye(3)
    f = [sum(sympy.diff(sigma[i, j], xs[j]) for j in range(3)) for i in range(3)]

    def vec(items):
        fns = [sympy.lambdify(xs, e, "numpy") for e in items]

        def ev(x):
            x = np.atleast_2d(x)
            return np.stack([np.broadcast_to(fn(x[:, 0], x[:, 1], x[:, 2]), (len(x),)) for fn in fns], axis=1)

        return ev

    sig_flat = vec([sigma[i, j] for i in range(3) for j in range(3)])
    f_ev = vec(f)
    return ManufacturedCase(
        name,
        m,
        VectorField(vec(exprs)),
        StressField(lambda x: sig_flat(x).reshape(-1, 3, 3), f_ev),
        VectorField(f_ev),
    )


DEFAULT_AMPLITUDES = (1, 2, 3)
RECIPES = ("polynomial-bubble", "trigonometric", "exact-capture")


def manufactured_case(material: MaterialModel, recipe: str = "trigonometric", amplitudes=DEFAULT_AMPLITUDES) -> ManufacturedCase:
    """Closed-form test problems on the unit cube.

    * ``polynomial-bubble``: ``u_i = c_i x1(1-x1) x2(1-x2) x3(1-x3)``.
    * ``trigonometric``: ``u_i = c_i sin(pi x1) sin(pi x2) sin(pi x3)``.
    * ``exact-capture``: a continuous ``u`` in the discrete displacement space
      whose stress lies in the discrete stress space; it cannot vanish on the
      boundary, so its trace is imposed as boundary data.
    """
    c = [Fraction(a) for a in amplitudes]
    x = [Polynomial.variable(i) for i in range(3)]
    if recipe == "polynomial-bubble":
        b = x[0] * (1 - x[0]) * x[1] * (1 - x[1]) * x[2] * (1 - x[2])
        return _polynomial_case(recipe, material, VectorPolynomial([b * ci for ci in c]), False)
    if recipe == "exact-capture":
        u = VectorPolynomial(
            [
                c[0] * (1 + 2 * x[1] - x[2] + x[1] * x[2]),
                c[1] * (x[0] * x[2] + 3 * x[2] - 1),
                c[2] * (x[0] * x[1] - x[0] + 2),
            ]
        )
        return _polynomial_case(recipe, material, u, True)
    if recipe == "trigonometric":
        xs = sympy.symbols("x1 x2 x3")
        bump = sympy.sin(sympy.pi * xs[0]) * sympy.sin(sympy.pi * xs[1]) * sympy.sin(sympy.pi * xs[2])
        return _sympy_case(recipe, material, [sympy.Rational(ci.numerator, ci.denominator) * bump for ci in c], xs)
    raise ValueError(f"unknown recipe {recipe!r}; choose from {RECIPES}")


def zero_case(material: MaterialModel) -> ManufacturedCase:
    return _polynomial_case("zero", material, VectorPolynomial([Polynomial()] * 3), False)


# ---------------------------------------------------------------------------
# Problem setup and diagnostics


@dataclass
class Discretization:
    mesh: BrickMesh
    element: ReferenceElement
    dofmap: GlobalDofMap
    material: MaterialModel
    quad: QuadratureRule = field(default_factory=QuadratureRule)

    @classmethod
    def build(cls, mesh: BrickMesh, variant: str, material: MaterialModel, quad: QuadratureRule | None = None):
        element = element_for(mesh, variant)
        return cls(mesh, element, global_dof_map(mesh, element), material, quad or QuadratureRule())

    def assemble(self, case: ManufacturedCase | None = None) -> SaddleSystem:
        f = case.f if case is not None else None
        g = case.boundary if case is not None else None
        return assemble_system(self.mesh, self.dofmap, self.element, self.material, f, self.quad, g)

    def solve(self, case: ManufacturedCase | None = None) -> MixedSolution:
        return solve_saddle(self.assemble(case))


def error_norms(sol: MixedSolution, case: ManufacturedCase, disc: Discretization, quad: QuadratureRule | None = None):
    """``(|sigma - sigma_h|, |u - u_h|, |div sigma - div sigma_h|)`` in L2."""
    quad = quad or QuadratureRule(max(disc.quad.order, 6))
    if quad.order < 5:
        raise ValueError("error norms need at least 5 Gauss points per axis")
    mesh, el, dm = disc.mesh, disc.element, disc.dofmap
    xq = quad.points
    es = evaluate_on_cells(case.sigma, mesh, xq) - stress_values(sol.sigma, mesh, el, dm, xq)
    eu = evaluate_on_cells(case.u, mesh, xq) - displacement_values(sol.u, mesh, el, dm, xq)
    ed = evaluate_on_cells(case.f, mesh, xq) - divergence_values(sol.sigma, mesh, el, dm, xq)
    return l2_norm(es, mesh, quad), l2_norm(eu, mesh, quad), l2_norm(ed, mesh, quad)


def divergence_coefficients(sigma: np.ndarray, disc: Discretization) -> np.ndarray:
    """Expansion of ``div sigma_h`` in the displacement basis (global vector)."""
    M, _ = local_mass(disc.element, disc.mesh, disc.quad)
    _, Bk = local_matrices(disc.element, disc.mesh.cell_geometry(0), disc.material, disc.quad)
    D = np.linalg.solve(M, Bk)
    local = sigma[disc.dofmap.cell_dofs] * disc.dofmap.signs
    return (local @ D.T).ravel()


def divergence_identity_defect(sol: MixedSolution, case: ManufacturedCase, disc: Discretization) -> float:
    """Relative max difference between ``div sigma_h`` and ``P_h f`` coefficients."""
    lhs = divergence_coefficients(sol.sigma, disc)
    rhs = project_displacement(case.f, disc.mesh, disc.element, disc.quad)
    return float(np.abs(lhs - rhs).max() / max(np.abs(rhs).max(), 1.0))


def normal_jump(
    sigma: np.ndarray,
    disc: Discretization,
    corrupt: tuple[int, int, float] | None = None,
) -> float:
    """Largest interior-face L2 norm of the jump of ``sigma_h n``.

    ``corrupt = (cell, local_dof, delta)`` perturbs one cell's local copy of a
    coefficient; it exists only to test that jumps are detected.
    """
    mesh, el, dm = disc.mesh, disc.element, disc.dofmap
    local = sigma[dm.cell_dofs] * dm.signs
    if corrupt is not None:
        c, a, delta = corrupt
        local = local.copy()
        local[c, a] += delta
    worst = 0.0
    n = np.array(mesh.n)
    for axis in range(3):
        lo_pts, w = disc.quad.face(axis, 1.0)
        hi_pts, _ = disc.quad.face(axis, 0.0)
        t_lo = Tabulation(el, lo_pts, mesh.h)
        t_hi = Tabulation(el, hi_pts, mesh.h)
        area = t_lo.det / t_lo.h[axis]
        shape = n.copy()
        shape[axis] -= 1
        for idx in np.ndindex(*shape):
            left = mesh.cell_index(idx)
            nb = list(idx)
            nb[axis] += 1
            right = mesh.cell_index(nb)
            sl = np.einsum("b,qbi->qi", local[left], t_lo.phi[:, :, :, axis])
            sr = np.einsum("b,qbi->qi", local[right], t_hi.phi[:, :, :, axis])
            worst = max(worst, math.sqrt(area * float(np.einsum("q,qi->", w, (sl - sr) ** 2))))
    return worst


def stress_norm(sigma: np.ndarray, disc: Discretization) -> float:
    vals = stress_values(sigma, disc.mesh, disc.element, disc.dofmap, disc.quad.points)
    return l2_norm(vals, disc.mesh, disc.quad)


def evaluate_solution(sol: MixedSolution, disc: Discretization, points: np.ndarray):
    """Point values ``(sigma (N,3,3), u (N,3))``; boundary points use the lower cell."""
    mesh, el, dm = disc.mesh, disc.element, disc.dofmap
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lo = np.array([float(v) for v in mesh.domain.lo])
    h = np.array([float(v) for v in mesh.h])
    t = (pts - lo) / h
    idx = np.clip(np.floor(t).astype(int), 0, np.array(mesh.n) - 1)
    xhat = t - idx
    cells = np.ravel_multi_index(tuple(idx.T), mesh.n)
    mono = monomial_values(xhat)
    phi = np.einsum("bijxyz,qxyz->qbij", el.stress_dense, mono) * np.outer(h, h)
    psi = np.einsum("cixyz,qxyz->qci", el.displacement_dense, mono) * h
    sl = sol.sigma[dm.cell_dofs[cells]] * dm.signs[cells]
    ul = sol.u[dm.cell_udofs[cells]]
    return np.einsum("qb,qbij->qij", sl, phi), np.einsum("qc,qci->qi", ul, psi)


def write_vtk_solution(path, sol: MixedSolution, disc: Discretization, samples: int = 2) -> None:
    """Legacy-ASCII VTK structured-points file with stress and displacement point data."""
    mesh = disc.mesh
    dims = [nk * samples + 1 for nk in mesh.n]
    lo = [float(v) for v in mesh.domain.lo]
    spacing = [float(hk) / samples for hk in mesh.h]
    axes = [lo[a] + spacing[a] * np.arange(dims[a]) for a in range(3)]
    # VTK orders points with x fastest
    gz, gy, gx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    sig, u = evaluate_solution(sol, disc, pts)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nmixed elasticity solution\nASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}\n")
        fh.write(f"ORIGIN {lo[0]:.17g} {lo[1]:.17g} {lo[2]:.17g}\n")
        fh.write(f"SPACING {spacing[0]:.17g} {spacing[1]:.17g} {spacing[2]:.17g}\n")
        fh.write(f"POINT_DATA {len(pts)}\nVECTORS displacement double\n")
        for v in u:
            fh.write(" ".join(f"{c:.10e}" for c in v) + "\n")
        fh.write("TENSORS stress double\n")
        for s in sig:
            for row in s:
                fh.write(" ".join(f"{c:.10e}" for c in row) + "\n")


# ---------------------------------------------------------------------------
# Refinement studies


@dataclass
class LevelResult:
    n: int
    h: float
    e_sigma: float
    e_u: float
    e_div: float
    div_identity: float
    jump: float
    residual: float


@dataclass
class ConvergenceReport:
    recipe: str
    variant: str
    levels: list[LevelResult]

    @staticmethod
    def _rate(a: float, b: float) -> float:
        if a <= 0 or b <= 0:
            return float("nan")
        return math.log2(a / b)

    def rates(self, name: str) -> list[float]:
        vals = [getattr(r, name) for r in self.levels]
        return [self._rate(a, b) for a, b in zip(vals, vals[1:])]

    def final_rates(self) -> dict:
        """Rates between the two finest levels."""
        return {k: self.rates(k)[-1] for k in ("e_sigma", "e_u", "e_div")}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "e_sigma", "e_u", "e_div", "rate_sigma", "rate_u", "rate_div"])
        rs = {k: [""] + [f"{r:.6f}" for r in self.rates(k)] for k in ("e_sigma", "e_u", "e_div")}
        for i, r in enumerate(self.levels):
            w.writerow(
                [f"{r.h:.10g}", f"{r.e_sigma:.10e}", f"{r.e_u:.10e}", f"{r.e_div:.10e}"]
                + [rs[k][i] for k in ("e_sigma", "e_u", "e_div")]
            )
        return buf.getvalue()


def check_levels(levels: Sequence[int]) -> list[int]:
    levels = [int(n) for n in levels]
    if len(levels) < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    if any(b != 2 * a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"levels must halve h uniformly, got {levels}")
    return levels


def run_level(case: ManufacturedCase, n: int, variant: str, quad: QuadratureRule | None = None) -> LevelResult:
    disc = Discretization.build(unit_cube_mesh(n), variant, case.material, quad)
    sol = disc.solve(case)
    es, eu, ed = error_norms(sol, case, disc)
    snorm = stress_norm(sol.sigma, disc)
    return LevelResult(
        n,
        1.0 / n,
        es,
        eu,
        ed,
        divergence_identity_defect(sol, case, disc),
        normal_jump(sol.sigma, disc) / max(snorm, 1e-300),
        sol.residual,
    )


def convergence_study(
    case: ManufacturedCase,
    levels: Sequence[int] = (2, 4, 8),
    variant: str = "full",
    quad: QuadratureRule | None = None,
) -> ConvergenceReport:
    levels = check_levels(levels)
    out = []
    for n in levels:
        try:
            out.append(run_level(case, n, variant, quad))
        except SolverError as exc:
            raise SolverError(f"level n={n}: {exc}") from exc
    return ConvergenceReport(case.name, variant, out)
