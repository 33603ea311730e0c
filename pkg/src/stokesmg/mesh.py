"""Nested triangulations of the unit square and Taylor-Hood dof numbering.

Level 0 is the "union jack" mesh: four 1/2 x 1/2 subsquares, each cut along
the diagonal through the centre point, so every triangle touches the single
interior vertex (1/2, 1/2). Finer levels come from red refinement.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# local edge j of a triangle joins local vertices _LOCAL_EDGES[j]
_LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])

_ON_SIDE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of the unit square.

    ``parent`` maps every triangle to the triangle of the previous level it
    was cut from (``None`` on the coarse mesh). Vertices are numbered so that
    the first ``n_coarse_vertices`` coincide with the coarse vertices and
    vertex ``n_coarse_vertices + e`` is the midpoint of coarse edge ``e``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    triangle_edges: np.ndarray
    boundary_vertex: np.ndarray
    boundary_edge: np.ndarray
    level: int
    h: float
    parent: np.ndarray | None = None
    n_coarse_vertices: int | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _on_boundary(points: np.ndarray) -> np.ndarray:
    x, y = points[..., 0], points[..., 1]
    return (
        (np.abs(x) < _ON_SIDE_TOL)
        | (np.abs(x - 1) < _ON_SIDE_TOL)
        | (np.abs(y) < _ON_SIDE_TOL)
        | (np.abs(y - 1) < _ON_SIDE_TOL)
    )


def _same_side(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """True where segment a-b lies on one of the four sides of the square."""
    out = np.zeros(len(a), dtype=bool)
    for comp in (0, 1):
        for val in (0.0, 1.0):
            out |= (np.abs(a[:, comp] - val) < _ON_SIDE_TOL) & (
                np.abs(b[:, comp] - val) < _ON_SIDE_TOL
            )
    return out


def _make_mesh(vertices, triangles, level, parent=None, n_coarse_vertices=None):
    # edges numbered in order of first appearance while sweeping triangles
    local = triangles[:, _LOCAL_EDGES]  # (nt, 3, 2)
    keys = np.sort(local.reshape(-1, 2), axis=1)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    edges = keys[first[order]]
    triangle_edges = rank[inverse.ravel()].reshape(-1, 3)

    boundary_vertex = _on_boundary(vertices)
    boundary_edge = _same_side(vertices[edges[:, 0]], vertices[edges[:, 1]])
    lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        triangle_edges=triangle_edges,
        boundary_vertex=boundary_vertex,
        boundary_edge=boundary_edge,
        level=level,
        h=float(lengths.max()),
        parent=parent,
        n_coarse_vertices=n_coarse_vertices,
    )


def build_coarse_mesh() -> Mesh:
    """Level-0 mesh: 9 vertices, 8 triangles, all sharing the centre vertex."""
    xs = np.array([0.0, 0.5, 1.0])
    vertices = np.array([(x, y) for y in xs for x in xs])
    c = 4  # centre (0.5, 0.5)
    # counterclockwise, two triangles per subsquare, diagonal through c
    triangles = np.array(
        [
            [0, 1, c], [0, c, 3],  # lower-left
            [1, 2, c], [2, 5, c],  # lower-right
            [3, c, 6], [c, 7, 6],  # upper-left
            [c, 5, 8], [c, 8, 7],  # upper-right
        ]
    )
    return _make_mesh(vertices, triangles, level=0)


def refine(mesh: Mesh) -> Mesh:
    """Red refinement: split every triangle into four via its edge midpoints."""
    nv = mesh.n_vertices
    mids = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    vertices = np.vstack([mesh.vertices, mids])

    v0, v1, v2 = mesh.triangles.T
    m01, m12, m20 = (mesh.triangle_edges + nv).T
    children = np.stack(
        [
            np.stack([v0, m01, m20], axis=1),
            np.stack([m01, v1, m12], axis=1),
            np.stack([m20, m12, v2], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ],
        axis=1,
    )  # (nt, 4, 3): children of a parent stay contiguous
    triangles = children.reshape(-1, 3)
    parent = np.repeat(np.arange(mesh.n_triangles), 4)
    return _make_mesh(vertices, triangles, mesh.level + 1, parent=parent, n_coarse_vertices=nv)


def build_hierarchy_meshes(level: int) -> list[Mesh]:
    meshes = [build_coarse_mesh()]
    for _ in range(level):
        meshes.append(refine(meshes[-1]))
    return meshes


@dataclass(frozen=True, eq=False)
class DofMaps:
    """Scalar P2 / P1 node numbering and the Dirichlet-reduced velocity dofs.

    Velocity dofs are component-blocked: ``[x-components | y-components]``,
    each over ``interior_p2`` in increasing node order.
    """

    p2_nodes: np.ndarray
    p1_nodes: np.ndarray
    p2_cells: np.ndarray
    p1_cells: np.ndarray
    interior_p2: np.ndarray
    p2_to_interior: np.ndarray = field(repr=False)

    @property
    def n_p2(self) -> int:
        return len(self.p2_nodes)

    @property
    def n_interior(self) -> int:
        return len(self.interior_p2)

    @property
    def n_velocity(self) -> int:
        return 2 * self.n_interior

    @property
    def n_pressure(self) -> int:
        return len(self.p1_nodes)

    @property
    def velocity_dofs(self) -> np.ndarray:
        return np.arange(self.n_velocity)

    @property
    def pressure_dofs(self) -> np.ndarray:
        return np.arange(self.n_pressure)


def build_dof_maps(mesh: Mesh) -> DofMaps:
    nv = mesh.n_vertices
    mids = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    p2_nodes = np.vstack([mesh.vertices, mids])
    # local P2 order: 3 vertices, then midpoints of edges (01), (12), (20)
    p2_cells = np.hstack([mesh.triangles, mesh.triangle_edges + nv])
    boundary = np.concatenate([mesh.boundary_vertex, mesh.boundary_edge])
    interior = np.flatnonzero(~boundary)
    to_interior = np.full(len(p2_nodes), -1, dtype=np.int64)
    to_interior[interior] = np.arange(len(interior))
    return DofMaps(
        p2_nodes=p2_nodes,
        p1_nodes=mesh.vertices.copy(),
        p2_cells=p2_cells,
        p1_cells=mesh.triangles.copy(),
        interior_p2=interior,
        p2_to_interior=to_interior,
    )


def write_mesh_csv(mesh: Mesh, path: str | Path) -> None:
    """Dump vertices and triangles as a two-section CSV file."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["# vertices"])
        w.writerow(["id", "x", "y", "boundary"])
        for i, (x, y) in enumerate(mesh.vertices):
            w.writerow([i, repr(float(x)), repr(float(y)), int(mesh.boundary_vertex[i])])
        w.writerow(["# triangles"])
        w.writerow(["id", "v0", "v1", "v2"])
        for i, t in enumerate(mesh.triangles):
            w.writerow([i, *map(int, t)])
