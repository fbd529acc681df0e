from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sps
import sympy

from brickstress.assembly import (
    MaterialModel,
    QuadratureRule,
    Tabulation,
    assemble_system,
    body_force_load,
    boundary_displacement_load,
    compliance_apply,
    compliance_apply_exact,
    local_matrices,
    piola_push_forward,
    pull_back,
    push_forward_displacement,
    stiffness_apply,
    write_system_coo,
)
from brickstress.mesh import CellGeometry, build_box_mesh, global_dof_map, unit_cube_mesh
from brickstress.polybox import Box, Polynomial, integrate_box
from brickstress.ref_element import RIGID, SYM_INDEX, extra_generator, nodal_basis
from brickstress.solver import Discretization, normal_jump

x1, x2, x3 = (Polynomial.variable(i) for i in range(3))


class TestMaterial:
    def test_validation(self):
        with pytest.raises(ValueError):
            MaterialModel(1, 0)
        with pytest.raises(ValueError):
            MaterialModel(-1, 1)
        with pytest.raises(ValueError):
            MaterialModel.from_engineering(1, 0.5)
        m = MaterialModel.from_engineering(1, Fraction(3, 10))
        assert m.mu == Fraction(5, 13) and m.lam == Fraction(15, 26)

    def test_identity_case(self):
        m = MaterialModel(0, Fraction(1, 2))
        assert np.allclose(compliance_apply(m, np.eye(3)), np.eye(3))

    def test_deviatoric(self):
        m = MaterialModel(2, 3)
        s = np.array([[1.0, 2, 0], [2, -1, 4], [0, 4, 0]])
        assert np.allclose(compliance_apply(m, s), s / 6)

    def test_inverse_symbolic(self):
        lam, mu = sympy.symbols("lam mu", positive=True)
        e = sympy.Matrix(3, 3, lambda i, j: sympy.Symbol(f"e{min(i, j)}{max(i, j)}"))
        sigma = 2 * mu * e + lam * e.trace() * sympy.eye(3)
        back = (sigma - lam / (3 * lam + 2 * mu) * sigma.trace() * sympy.eye(3)) / (2 * mu)
        assert sympy.simplify(back - e) == sympy.zeros(3, 3)

    def test_inverse_numeric(self):
        m = MaterialModel.from_engineering(2, 0.25)
        rng = np.random.default_rng(0)
        s = rng.random((5, 3, 3))
        s = s + np.swapaxes(s, 1, 2)
        assert np.allclose(stiffness_apply(m, compliance_apply(m, s)), s)

    def test_spd(self):
        lo, hi = MaterialModel.from_engineering(1, 0.49).eigenvalue_bounds()
        assert 0 < lo <= hi


class TestPiola:
    def test_identity_map(self):
        g = CellGeometry((1, 1, 1), (0, 0, 0))
        s = extra_generator(1, 2, 3)
        assert piola_push_forward(s, g) == s

    def test_divergence_free_preserved(self):
        g = CellGeometry((Fraction(1, 2), 2, Fraction(1, 3)), (1, 0, Fraction(-1, 4)))
        assert piola_push_forward(extra_generator(1, 2, 1), g).divergence().is_zero()

    def test_entry_scaling(self):
        g = CellGeometry((2, 1, 1), (0, 0, 0))
        from brickstress.ref_element import MatrixPolynomial

        one = MatrixPolynomial({ij: Polynomial.constant(1) for ij in SYM_INDEX})
        t = piola_push_forward(one, g)
        assert t[0, 0] == Polynomial.constant(4) and t[0, 1] == Polynomial.constant(2)
        assert t[1, 1] == Polynomial.constant(1)

    def test_divergence_covariance(self, full_element):
        g = CellGeometry((Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)), (1, 2, 3))
        for b in (0, 30, 60, 77):
            phi = full_element.nodal_basis[b]
            lhs = piola_push_forward(phi, g).divergence()
            rhs = push_forward_displacement(phi.divergence(), g)
            assert lhs == rhs

    def test_pull_back_inverse(self, full_element):
        g = CellGeometry((Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)), (1, 2, 3))
        phi = full_element.nodal_basis[11]
        assert pull_back(piola_push_forward(phi, g), g) == phi


class TestLocalMatrices:
    geom = CellGeometry((Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)), (Fraction(1, 2), 0, Fraction(3, 4)))

    def test_symmetric(self, full_element, material):
        A, B = local_matrices(full_element, self.geom, material)
        assert A.shape == (78, 78) and B.shape == (12, 78)
        assert np.abs(A - A.T).max() <= 1e-13 * np.abs(A).max()
        assert np.linalg.eigvalsh(A).min() > 0

    def test_matches_exact_integration(self, full_element, material):
        A, B = local_matrices(full_element, self.geom, material)
        box = Box(self.geom.b, tuple(b + h for b, h in zip(self.geom.b, self.geom.h)))
        phys = {b: piola_push_forward(full_element.nodal_basis[b], self.geom) for b in (0, 17, 50, 70, 77)}
        psi = [push_forward_displacement(v, self.geom) for v in full_element.displacement_basis]
        for a in phys:
            ca = compliance_apply_exact(material, phys[a])
            for b in phys:
                integrand = sum((ca[i, j] * phys[b][i, j] for i in range(3) for j in range(3)), Polynomial())
                ref = float(integrate_box(integrand, box))
                assert abs(A[a, b] - ref) <= 1e-12 * max(1.0, abs(ref)) + 1e-12 * np.abs(A).max()
            div = phys[a].divergence()
            for c in range(12):
                ref = float(integrate_box(sum((div[i] * psi[c][i] for i in range(3)), Polynomial()), box))
                assert abs(B[c, a] - ref) <= 1e-12 * max(1.0, np.abs(B).max())

    def test_rigid_translations(self, material):
        el = nodal_basis(RIGID)
        g = CellGeometry((1, 1, 1), (0, 0, 0))
        _, B = local_matrices(el, g, material)
        box = Box.unit()
        for c, v in enumerate(el.displacement_basis[:3]):
            i = next(k for k in range(3) if not v[k].is_zero())
            assert v[i] == Polynomial.constant(1)
            for b in (0, 25, 71):
                ref = integrate_box(el.nodal_basis[b].divergence()[i], box)
                assert B[c, b] == pytest.approx(float(ref), abs=1e-13)

    @pytest.mark.parametrize("variant, size", [("full", 12), ("rigid", 6)])
    def test_divergence_block_full_rank_exact(self, variant, size):
        from brickstress import exact

        el = nodal_basis(variant)
        box = Box.unit()
        rows = [
            [integrate_box(sum((phi.divergence()[i] * v[i] for i in range(3)), Polynomial()), box) for phi in el.nodal_basis]
            for v in el.displacement_basis
        ]
        assert exact.rank(rows) == size

    def test_low_order_rejected(self, full_element, material):
        with pytest.raises(ValueError):
            local_matrices(full_element, self.geom, material, QuadratureRule(3))


class TestGlobalAssembly:
    def test_single_cell_is_local(self, full_element, material):
        mesh = unit_cube_mesh(1)
        dm = global_dof_map(mesh, full_element)
        sys_ = assemble_system(mesh, dm, full_element, material)
        A, B = local_matrices(full_element, mesh.cell_geometry(0), material)
        d, u = dm.cell_dofs[0], dm.cell_udofs[0]
        assert sorted(d) == list(range(78))
        assert np.allclose(sys_.A.toarray()[np.ix_(d, d)], A, rtol=0, atol=1e-14)
        assert np.allclose(sys_.B.toarray()[np.ix_(u, d)], B, rtol=0, atol=1e-14)
        assert not sys_.load.any()

    @pytest.mark.parametrize("variant", ["full", "rigid"])
    def test_global_divergence_block_full_rank(self, material, variant):
        disc = Discretization.build(unit_cube_mesh(2), variant, material)
        B = disc.assemble().B.toarray()
        sv = np.linalg.svd(B, compute_uv=False)
        assert sv.min() > 1e-8 * sv.max()

    def test_sparsity_follows_adjacency(self, full_element, material):
        mesh = unit_cube_mesh((3, 1, 1))
        dm = global_dof_map(mesh, full_element)
        A = assemble_system(mesh, dm, full_element, material).A.tocoo()
        cells_of = {}
        for c in range(mesh.n_cells):
            for g in dm.cell_dofs[c]:
                cells_of.setdefault(int(g), set()).add(c)
        for r, c in zip(A.row, A.col):
            assert cells_of[int(r)] & cells_of[int(c)]

    def test_inclusion_of_divergence(self, full_element):
        """div of every nodal function expands exactly in the displacement basis."""
        from brickstress.ref_element import div_in_space

        assert all(div_in_space(phi, full_element.displacement_basis) for phi in full_element.nodal_basis)

    def test_random_vector_normal_continuity(self, material):
        rng = np.random.default_rng(4)
        for variant, n in (("full", (2, 2, 2)), ("rigid", (3, 2, 2))):
            disc = Discretization.build(unit_cube_mesh(n), variant, material)
            sigma = rng.standard_normal(disc.dofmap.n_stress)
            assert normal_jump(sigma, disc) <= 1e-10

    def test_body_force(self, full_element):
        mesh = unit_cube_mesh(2)
        dm = global_dof_map(mesh, full_element)
        assert not body_force_load(mesh, dm, full_element, None).any()
        F = body_force_load(mesh, dm, full_element, lambda x: np.ones_like(x))
        # constant components of the basis integrate to the cell volume
        assert F.sum() > 0

    def test_boundary_load_by_divergence_theorem(self, full_element):
        mesh = unit_cube_mesh((2, 1, 1))
        dm = global_dof_map(mesh, full_element)
        gvec = np.array([1.0, -2.0, 0.5])
        G = boundary_displacement_load(mesh, dm, full_element, lambda x: np.tile(gvec, (len(x), 1)))
        quad = QuadratureRule()
        tab = Tabulation(full_element, quad.points, mesh.h)
        ref = np.zeros(dm.n_stress)
        local = tab.det * np.einsum("q,qbi,i->b", quad.weights, tab.div, gvec)
        for c in range(mesh.n_cells):
            np.add.at(ref, dm.cell_dofs[c], local)
        assert np.allclose(G, ref, atol=1e-12)

    def test_index_errors(self, full_element, material):
        mesh = unit_cube_mesh((2, 1, 1))
        dm = global_dof_map(mesh, full_element)
        dm.cell_dofs[0, 0] = dm.n_stress + 5
        with pytest.raises(IndexError):
            assemble_system(mesh, dm, full_element, material)

    def test_rigid_aspect_guard(self, material):
        mesh = build_box_mesh(Box((0, 0, 0), (2, 1, 1)), (1, 1, 1))
        el = nodal_basis(RIGID)
        with pytest.raises(ValueError):
            assemble_system(mesh, global_dof_map(mesh, el), el, material)

    def test_coo_dump(self, full_element, material, tmp_path):
        mesh = unit_cube_mesh(1)
        s = assemble_system(mesh, global_dof_map(mesh, full_element), full_element, material)
        path = tmp_path / "sys.txt"
        write_system_coo(s, path)
        rows = [l.split() for l in path.read_text().splitlines() if l and not l.startswith("#")]
        K = s.matrix()
        entries = [r for r in rows if len(r) == 3]
        assert len(entries) == K.nnz
        r, c, v = entries[0]
        assert K[int(r), int(c)] == pytest.approx(float(v))
        assert sps.issparse(K) and K.shape == (90, 90)
