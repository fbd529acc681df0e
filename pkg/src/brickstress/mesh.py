"""Structured brick meshes of a box and the global stress DOF numbering.

Cells, faces and edges live on regular lattices.  Faces normal to axis ``i``
form a lattice with ``n_i + 1`` layers along ``i``; edges along axis ``k``
have ``n_k`` segments along ``k`` and ``n + 1`` positions along the other two
axes.  All normals point along ``+e_i``, so no orientation signs are needed.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .polybox import Box, as_fraction, compose_affine
from .ref_element import EDGE, FACE_NN, FACE_NT, INTERIOR, ReferenceElement

DEFAULT_ASPECT_BOUND = 4


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class CellGeometry:
    """Affine map ``F(xh) = B xh + b`` with ``B = diag(h)``."""

    h: tuple
    b: tuple

    @property
    def B(self) -> np.ndarray:
        return np.diag([float(v) for v in self.h])

    @property
    def offset(self) -> np.ndarray:
        return np.array([float(v) for v in self.b])

    @property
    def volume(self) -> Fraction:
        return self.h[0] * self.h[1] * self.h[2]

    def to_physical(self, xhat: np.ndarray) -> np.ndarray:
        return np.asarray(xhat) * self.B.diagonal() + self.offset

    def to_reference(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.offset) / self.B.diagonal()


class BrickMesh:
    """Uniform ``n1 x n2 x n3`` partition of a box into bricks."""

    def __init__(self, domain: Box, n: Sequence[int], aspect_bound: float = DEFAULT_ASPECT_BOUND):
        n = tuple(int(v) for v in n)
        if len(n) != 3 or min(n) < 1:
            raise MeshError(f"subdivisions must be three positive integers, got {n}")
        self.domain = domain
        self.n = n
        self.h = tuple(L / k for L, k in zip(domain.lengths, n))
        ratio = max(self.h) / min(self.h)
        if ratio > aspect_bound:
            raise MeshError(f"cell aspect ratio {float(ratio):.3g} exceeds bound {aspect_bound}")
        self.aspect_bound = aspect_bound

    # lattice shapes
    @property
    def n_cells(self) -> int:
        return self.n[0] * self.n[1] * self.n[2]

    def face_shape(self, axis: int) -> tuple:
        return tuple(v + (a == axis) for a, v in enumerate(self.n))

    def edge_shape(self, axis: int) -> tuple:
        return tuple(v + (a != axis) for a, v in enumerate(self.n))

    @property
    def vertex_shape(self) -> tuple:
        return tuple(v + 1 for v in self.n)

    @cached_property
    def face_offsets(self) -> tuple:
        sizes = [int(np.prod(self.face_shape(a))) for a in range(3)]
        return (0, sizes[0], sizes[0] + sizes[1], sum(sizes))

    @cached_property
    def edge_offsets(self) -> tuple:
        sizes = [int(np.prod(self.edge_shape(a))) for a in range(3)]
        return (0, sizes[0], sizes[0] + sizes[1], sum(sizes))

    @property
    def n_faces(self) -> int:
        return self.face_offsets[3]

    @property
    def n_edges(self) -> int:
        return self.edge_offsets[3]

    @property
    def n_vertices(self) -> int:
        return int(np.prod(self.vertex_shape))

    def cell_index(self, idx: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(idx), self.n))

    def cell_multi_index(self, cell: int) -> tuple:
        return tuple(int(v) for v in np.unravel_index(cell, self.n))

    def face_index(self, axis: int, idx: Sequence[int]) -> int:
        return self.face_offsets[axis] + int(np.ravel_multi_index(tuple(idx), self.face_shape(axis)))

    def edge_index(self, axis: int, idx: Sequence[int]) -> int:
        return self.edge_offsets[axis] + int(np.ravel_multi_index(tuple(idx), self.edge_shape(axis)))

    def face_axis_and_index(self, face: int) -> tuple:
        axis = int(np.searchsorted(self.face_offsets, face, side="right")) - 1
        idx = np.unravel_index(face - self.face_offsets[axis], self.face_shape(axis))
        return axis, tuple(int(v) for v in idx)

    def face_cells(self, face: int) -> list[int]:
        """Cells incident to a face (one on the boundary, two inside)."""
        axis, idx = self.face_axis_and_index(face)
        out = []
        for shift in (-1, 0):
            c = list(idx)
            c[axis] += shift
            if 0 <= c[axis] < self.n[axis]:
                out.append(self.cell_index(c))
        return out

    def interior_faces(self) -> list[int]:
        return [f for f in range(self.n_faces) if len(self.face_cells(f)) == 2]

    def edge_cells(self, edge: int) -> list[int]:
        axis = int(np.searchsorted(self.edge_offsets, edge, side="right")) - 1
        idx = np.unravel_index(edge - self.edge_offsets[axis], self.edge_shape(axis))
        others = [a for a in range(3) if a != axis]
        out = []
        for s in (-1, 0):
            for t in (-1, 0):
                c = list(int(v) for v in idx)
                c[others[0]] += s
                c[others[1]] += t
                if all(0 <= c[a] < self.n[a] for a in range(3)):
                    out.append(self.cell_index(c))
        return out

    def cell_geometry(self, cell: int) -> CellGeometry:
        idx = self.cell_multi_index(cell)
        b = tuple(self.domain.lo[a] + idx[a] * self.h[a] for a in range(3))
        return CellGeometry(self.h, b)

    @cached_property
    def cell_offsets(self) -> np.ndarray:
        """Lower corners of all cells as floats, shape ``(n_cells, 3)``."""
        return np.array([[float(v) for v in self.cell_geometry(c).b] for c in range(self.n_cells)])

    @property
    def h_max(self) -> float:
        return float(max(self.h))

    def vertices(self) -> np.ndarray:
        axes = [
            np.array([float(self.domain.lo[a] + i * self.h[a]) for i in range(self.n[a] + 1)])
            for a in range(3)
        ]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)

    def cell_vertices(self, cell: int) -> list[int]:
        """Vertex ids of a cell in VTK hexahedron order."""
        a, b, c = self.cell_multi_index(cell)
        corners = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
        return [
            int(np.ravel_multi_index((a + i, b + j, c + k), self.vertex_shape)) for i, j, k in corners
        ]

    def summary(self) -> str:
        lo = ", ".join(str(v) for v in self.domain.lo)
        hi = ", ".join(str(v) for v in self.domain.hi)
        return "\n".join(
            [
                f"box mesh [{lo}] x [{hi}]",
                f"subdivisions: {self.n[0]} x {self.n[1]} x {self.n[2]}",
                f"cell widths: {', '.join(str(v) for v in self.h)}",
                f"cells: {self.n_cells}, faces: {self.n_faces}, edges: {self.n_edges}, vertices: {self.n_vertices}",
                f"interior faces: {len(self.interior_faces())}",
            ]
        )

    __str__ = summary


def build_box_mesh(domain: Box, n: Sequence[int], aspect_bound: float = DEFAULT_ASPECT_BOUND) -> BrickMesh:
    return BrickMesh(domain, n, aspect_bound)


def unit_cube_mesh(n) -> BrickMesh:
    if isinstance(n, int):
        n = (n, n, n)
    return BrickMesh(Box.unit(), n)


def cell_geometry(mesh: BrickMesh, cell: int) -> CellGeometry:
    return mesh.cell_geometry(cell)


# ---------------------------------------------------------------------------
# Global DOF numbering


def _entity_of(dof) -> tuple:
    """Reference entity of a local DOF plus the key identifying its slot there.

    Entities: ``("edge", axis, (shift...))``, ``("face", axis, (shift...))``
    or ``("cell",)``; the shift is the lattice offset from the cell index.
    """
    fixed = dict(dof.fixed)
    shift = [0, 0, 0]
    for ax, val in fixed.items():
        shift[ax] = int(val)
    if dof.kind == EDGE:
        axis = next(a for a in range(3) if a not in fixed)
        return ("edge", axis, tuple(shift)), (dof.kind, dof.target, dof.weight)
    if dof.kind in (FACE_NN, FACE_NT):
        (axis,) = fixed
        return ("face", axis, tuple(shift)), (dof.kind, dof.target, dof.weight)
    return ("cell",), (dof.kind, dof.target, dof.weight)


@dataclass
class GlobalDofMap:
    """Local-to-global stress numbering (edges, then faces, then cells).

    ``cell_dofs[c, a]`` is the global index of local DOF ``a`` on cell ``c``;
    ``signs`` are all ``+1`` for axis-aligned meshes.  Displacement DOFs are
    cell-private: ``cell_udofs[c] = c * m + arange(m)``.
    """

    cell_dofs: np.ndarray
    signs: np.ndarray
    cell_udofs: np.ndarray
    n_stress: int
    n_displacement: int
    entity_kind: np.ndarray  # per global stress DOF: "edge" | "face" | "cell"
    entity_id: np.ndarray
    per_kind: dict

    def vertex_dofs(self) -> list[int]:
        return [g for g, k in enumerate(self.entity_kind) if k not in ("edge", "face", "cell")]


def global_dof_map(mesh: BrickMesh, element: ReferenceElement) -> GlobalDofMap:
    dofs = element.dofs
    entities = [_entity_of(d) for d in dofs]
    slots: dict[tuple, list] = {"edge": [], "face": [], "cell": []}
    # slot order per entity type: first appearance in element DOF order, per axis
    per_entity_slots: dict[tuple, list] = defaultdict(list)
    for ent, key in entities:
        tag = ent[:2] if ent[0] != "cell" else ent
        if key not in per_entity_slots[tag]:
            per_entity_slots[tag].append(key)
    per_type = {}
    for tag, keys in per_entity_slots.items():
        per_type.setdefault(tag[0], set()).add(len(keys))
    for kind, sizes in per_type.items():
        if len(sizes) != 1:
            raise MeshError(f"{kind} entities carry differing DOF counts {sorted(sizes)}")
        slots[kind] = sizes.pop()
    n_edge = slots["edge"] or 0
    n_face = slots["face"] or 0
    n_cell = slots["cell"] or 0
    edge_base = 0
    face_base = edge_base + n_edge * mesh.n_edges
    cell_base = face_base + n_face * mesh.n_faces
    total = cell_base + n_cell * mesh.n_cells

    nloc = len(dofs)
    cell_dofs = np.empty((mesh.n_cells, nloc), dtype=np.int64)
    for c in range(mesh.n_cells):
        idx = mesh.cell_multi_index(c)
        for a, (ent, key) in enumerate(entities):
            slot = per_entity_slots[ent[:2] if ent[0] != "cell" else ent].index(key)
            if ent[0] == "cell":
                g = cell_base + c * n_cell + slot
            else:
                lat = tuple(i + s for i, s in zip(idx, ent[2]))
                if ent[0] == "edge":
                    g = edge_base + mesh.edge_index(ent[1], lat) * n_edge + slot
                else:
                    g = face_base + mesh.face_index(ent[1], lat) * n_face + slot
            cell_dofs[c, a] = g

    kind = np.empty(total, dtype=object)
    ent_id = np.empty(total, dtype=np.int64)
    kind[:face_base] = "edge"
    kind[face_base:cell_base] = "face"
    kind[cell_base:] = "cell"
    if n_edge:
        ent_id[:face_base] = np.arange(face_base) // n_edge
    if n_face:
        ent_id[face_base:cell_base] = np.arange(cell_base - face_base) // n_face
    if n_cell:
        ent_id[cell_base:] = np.arange(total - cell_base) // n_cell

    m = element.n_displacement
    cell_udofs = np.arange(mesh.n_cells * m, dtype=np.int64).reshape(mesh.n_cells, m)
    return GlobalDofMap(
        cell_dofs=cell_dofs,
        signs=np.ones_like(cell_dofs, dtype=float),
        cell_udofs=cell_udofs,
        n_stress=total,
        n_displacement=mesh.n_cells * m,
        entity_kind=kind,
        entity_id=ent_id,
        per_kind={"edge": n_edge, "face": n_face, "cell": n_cell},
    )


def expected_stress_dof_count(mesh: BrickMesh, element: ReferenceElement) -> int:
    """Entity-sum formula: 2 per edge, 8 per face, interior DOFs per cell."""
    n_int = len(element.dof_indices(INTERIOR))
    return 2 * mesh.n_edges + 8 * mesh.n_faces + n_int * mesh.n_cells


def dof_locus_keys(mesh: BrickMesh, element: ReferenceElement) -> list[list[tuple]]:
    """Physical description of every local DOF on every cell.

    A key holds the DOF kind, the fixed physical coordinates, the physical
    extent along free axes, the weight rewritten in physical coordinates and
    the target entry.  Two local DOFs represent the same global functional
    exactly when their keys coincide.
    """
    out = []
    for c in range(mesh.n_cells):
        g = mesh.cell_geometry(c)
        inv_scale = [1 / h for h in g.h]
        shift = [-b / h for b, h in zip(g.b, g.h)]
        keys = []
        for d in element.dofs:
            fixed = tuple((ax, g.b[ax] + as_fraction(v) * g.h[ax]) for ax, v in d.fixed)
            ranges = tuple((ax, g.b[ax], g.b[ax] + g.h[ax]) for ax in d.free_axes)
            w = compose_affine(d.weight, inv_scale, shift)
            kind = "face" if d.kind in (FACE_NN, FACE_NT) else d.kind
            if d.kind == INTERIOR:
                ranges = ranges + (("cell", c),)
            keys.append((kind, d.kind, fixed, ranges, w, d.target))
        out.append(keys)
    return out


def union_find_dof_count(mesh: BrickMesh, element: ReferenceElement) -> tuple[int, dict]:
    """Merge coincident physical DOF loci with a union-find.

    Returns the number of classes and the class representative of every
    ``(cell, local)`` pair.  Independent of :func:`global_dof_map`.
    """
    keys = dof_locus_keys(mesh, element)
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    first: dict = {}
    for c, row in enumerate(keys):
        for a, k in enumerate(row):
            node = (c, a)
            parent[node] = node
            if k in first:
                ra, rb = find(first[k]), find(node)
                if ra != rb:
                    parent[rb] = ra
            else:
                first[k] = node
    classes = {node: find(node) for node in parent}
    return len(set(classes.values())), classes


def check_dof_map(mesh: BrickMesh, element: ReferenceElement, dofmap: GlobalDofMap) -> None:
    """Cross-check the lattice numbering against physical locus matching.

    Raises :class:`MeshError` when two local DOFs sharing a global index have
    different loci/weights, or coincident loci get different indices.
    """
    keys = dof_locus_keys(mesh, element)
    by_global: dict = {}
    by_key: dict = {}
    for c, row in enumerate(keys):
        for a, k in enumerate(row):
            g = int(dofmap.cell_dofs[c, a])
            if by_global.setdefault(g, k) != k:
                raise MeshError(f"global DOF {g} joins mismatched loci {by_global[g]} and {k}")
            if by_key.setdefault(k, g) != g:
                raise MeshError(f"coincident locus {k} numbered {by_key[k]} and {g}")
    if len(by_global) != dofmap.n_stress:
        raise MeshError(f"{dofmap.n_stress - len(by_global)} global DOFs are never referenced")


def write_vtk_mesh(mesh: BrickMesh, path, cell_data: dict | None = None) -> None:
    """Legacy ASCII VTK (3.0) unstructured grid of hexahedra."""
    pts = mesh.vertices()
    lines = ["# vtk DataFile Version 3.0", "brick mesh", "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {len(pts)} double")
    lines += [f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in pts]
    lines.append(f"CELLS {mesh.n_cells} {9 * mesh.n_cells}")
    lines += ["8 " + " ".join(str(v) for v in mesh.cell_vertices(c)) for c in range(mesh.n_cells)]
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines += ["12"] * mesh.n_cells
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_cells}")
        for name, values in cell_data.items():
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [f"{float(v):.17g}" for v in values]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
