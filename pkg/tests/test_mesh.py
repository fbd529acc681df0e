from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brickstress.mesh import (
    MeshError,
    build_box_mesh,
    cell_geometry,
    check_dof_map,
    expected_stress_dof_count,
    global_dof_map,
    union_find_dof_count,
    unit_cube_mesh,
    write_vtk_mesh,
)
from brickstress.polybox import Box
from brickstress.ref_element import RIGID, nodal_basis


def brute_force_counts(n):
    """Enumerate lattice faces and edges directly from cell corners."""
    faces, edges = set(), set()
    for idx in product(*(range(k) for k in n)):
        for axis in range(3):
            for s in (0, 1):
                f = list(idx)
                f[axis] += s
                faces.add((axis, tuple(f)))
            others = [a for a in range(3) if a != axis]
            for s, t in product((0, 1), repeat=2):
                e = list(idx)
                e[others[0]] += s
                e[others[1]] += t
                edges.add((axis, tuple(e)))
    return len(faces), len(edges)


class TestBrickMesh:
    @pytest.mark.parametrize("n, counts", [((2, 2, 2), (8, 36, 54)), ((1, 1, 1), (1, 6, 12))])
    def test_entity_counts(self, n, counts):
        mesh = unit_cube_mesh(n)
        assert (mesh.n_cells, mesh.n_faces, mesh.n_edges) == counts

    @given(st.tuples(*(st.integers(1, 4) for _ in range(3))))
    @settings(max_examples=25)
    def test_counts_match_enumeration(self, n):
        mesh = build_box_mesh(Box.unit(), n)
        assert (mesh.n_faces, mesh.n_edges) == brute_force_counts(n)

    def test_interior_faces(self):
        mesh = unit_cube_mesh((2, 1, 1))
        assert len(mesh.interior_faces()) == 1
        f = mesh.interior_faces()[0]
        assert mesh.face_axis_and_index(f)[0] == 0
        assert sorted(mesh.face_cells(f)) == [0, 1]

    def test_edge_incidence(self):
        mesh = unit_cube_mesh(2)
        assert max(len(mesh.edge_cells(e)) for e in range(mesh.n_edges)) == 4
        assert min(len(mesh.edge_cells(e)) for e in range(mesh.n_edges)) == 1
        # Euler-style: local incidences equal the sharing-weighted global count
        assert sum(len(mesh.edge_cells(e)) for e in range(mesh.n_edges)) == 12 * mesh.n_cells
        assert sum(len(mesh.face_cells(f)) for f in range(mesh.n_faces)) == 6 * mesh.n_cells

    def test_geometry(self):
        g = cell_geometry(unit_cube_mesh(1), 0)
        assert np.array_equal(g.B, np.eye(3)) and tuple(g.b) == (0, 0, 0)
        g = cell_geometry(unit_cube_mesh(2), 0)
        assert np.allclose(g.B, np.eye(3) / 2) and tuple(g.b) == (0, 0, 0)
        mesh = build_box_mesh(Box((0, 0, 0), (2, 1, 1)), (2, 1, 1))
        g = cell_geometry(mesh, 1)
        assert tuple(g.b) == (1, 0, 0) and np.array_equal(g.B, np.eye(3))

    def test_reference_round_trip(self):
        g = cell_geometry(build_box_mesh(Box((0, 0, 0), (2, 1, 1)), (2, 2, 2)), 5)
        xh = np.random.default_rng(0).random((4, 3))
        assert np.allclose(g.to_reference(g.to_physical(xh)), xh)

    def test_invalid(self):
        with pytest.raises(MeshError):
            unit_cube_mesh((0, 1, 1))
        with pytest.raises(MeshError):
            build_box_mesh(Box((0, 0, 0), (10, 1, 1)), (1, 1, 1))
        build_box_mesh(Box((0, 0, 0), (10, 1, 1)), (1, 1, 1), aspect_bound=10)
        with pytest.raises(ValueError):
            Box((0, 0, 0), (0, 1, 1))

    def test_summary_and_vtk(self, tmp_path):
        mesh = unit_cube_mesh((2, 1, 1))
        assert "cells: 2" in mesh.summary()
        path = tmp_path / "mesh.vtk"
        write_vtk_mesh(mesh, path, {"id": range(2)})
        text = path.read_text().splitlines()
        assert text[0] == "# vtk DataFile Version 3.0"
        assert "CELLS 2 18" in text and "CELL_TYPES 2" in text


class TestGlobalDofMap:
    @pytest.mark.parametrize(
        "n, full, rigid",
        [((1, 1, 1), 78, 72), ((2, 1, 1), 140, 128), ((2, 2, 2), 444, 396), ((3, 2, 1), 360, 324)],
    )
    def test_counts_three_ways(self, full_element, n, full, rigid):
        mesh = unit_cube_mesh(n)
        for element, total in ((full_element, full), (nodal_basis(RIGID, mesh.h), rigid)):
            dm = global_dof_map(mesh, element)
            assert dm.n_stress == total
            assert expected_stress_dof_count(mesh, element) == total
            assert union_find_dof_count(mesh, element)[0] == total
            check_dof_map(mesh, element, dm)

    def test_displacement_private(self, full_element):
        mesh = unit_cube_mesh((2, 1, 1))
        dm = global_dof_map(mesh, full_element)
        assert dm.n_displacement == 24
        assert len(set(dm.cell_udofs.ravel())) == 24

    def test_shared_face_dofs(self, full_element):
        mesh = unit_cube_mesh((2, 1, 1))
        dm = global_dof_map(mesh, full_element)
        shared = set(dm.cell_dofs[0]) & set(dm.cell_dofs[1])
        assert len(shared) == 16  # 8 on the face, 2 on each of its 4 edges

    def test_no_vertex_dofs(self, full_element):
        for n in ((1, 1, 1), (2, 2, 2), (4, 4, 4)):
            dm = global_dof_map(unit_cube_mesh(n), full_element)
            assert dm.vertex_dofs() == []
            assert set(dm.entity_kind) <= {"edge", "face", "cell"}

    def test_signs_positive(self, full_element):
        dm = global_dof_map(unit_cube_mesh(2), full_element)
        assert np.all(dm.signs == 1)

    def test_deterministic(self, full_element):
        mesh = unit_cube_mesh((3, 2, 2))
        a = global_dof_map(mesh, full_element)
        b = global_dof_map(mesh, full_element)
        assert np.array_equal(a.cell_dofs, b.cell_dofs)

    def test_corrupted_map_detected(self, full_element):
        mesh = unit_cube_mesh((2, 1, 1))
        dm = global_dof_map(mesh, full_element)
        dm.cell_dofs[1, 0], dm.cell_dofs[1, 1] = dm.cell_dofs[1, 1], dm.cell_dofs[1, 0]
        with pytest.raises(MeshError):
            check_dof_map(mesh, full_element, dm)

    def test_non_uniform_widths(self, full_element):
        mesh = build_box_mesh(Box((0, 0, 0), (Fraction(3), 2, 1)), (3, 1, 1))
        dm = global_dof_map(mesh, full_element)
        check_dof_map(mesh, full_element, dm)
