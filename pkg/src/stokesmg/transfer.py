"""Canonical embedding between nested Taylor-Hood spaces and its transpose."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import p2_values
from .kkt import Layout
from .mesh import DofMaps, Mesh

_DROP = 1e-14


def _barycentric(points: np.ndarray, tri_coords: np.ndarray) -> np.ndarray:
    p0 = tri_coords[:, 0]
    d1 = tri_coords[:, 1] - p0
    d2 = tri_coords[:, 2] - p0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    r = points - p0
    l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
    l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
    return np.stack([1 - l1 - l2, l1, l2], axis=-1)


def _interpolation_matrix(fine_cells, fine_nodes, coarse_cells, coarse_coords, parent, basis, n_coarse):
    """Rows: fine nodes; entries: coarse basis functions evaluated at those nodes.

    Every fine node is evaluated in the parent of the first fine cell that
    contains it; the coarse space is continuous, so any containing parent
    gives the same values.
    """
    n_fine = len(fine_nodes)
    flat = fine_cells.ravel()
    owner = np.repeat(parent, fine_cells.shape[1])
    nodes, first = np.unique(flat, return_index=True)
    if len(nodes) != n_fine:
        raise ValueError("fine cells do not cover every fine node")
    par = owner[first]
    bary = _barycentric(fine_nodes[nodes], coarse_coords[par])
    if np.any(bary < -1e-12):
        raise ValueError("fine node outside its parent triangle: meshes are not nested")
    vals = basis(bary)  # (n_fine, n_local)
    cols = coarse_cells[par]
    rows = np.repeat(nodes[:, None], cols.shape[1], axis=1)
    keep = np.abs(vals) > _DROP
    P = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n_fine, n_coarse)).tocsr()
    P.sum_duplicates()
    return P


@dataclass(frozen=True, eq=False)
class TransferOperator:
    """Prolongation from level k-1 to level k for the full state vector.

    ``P_u`` acts on one interior velocity component (scalar P2), ``P_p`` on
    scalar P1 pressures and ``P_p2`` on unreduced scalar P2 coefficients.
    ``matrix`` is the block-diagonal prolongation of a whole
    ``(u, p, lam, mu)`` vector.
    """

    P_u: sp.csr_matrix
    P_p: sp.csr_matrix
    coarse: Layout
    fine: Layout
    matrix: sp.csr_matrix
    P_p2: sp.csr_matrix

    def prolongate(self, x_coarse: np.ndarray) -> np.ndarray:
        self.coarse.check(x_coarse)
        return self.matrix @ x_coarse

    def restrict(self, r_fine: np.ndarray) -> np.ndarray:
        self.fine.check(r_fine)
        return self.matrix.T @ r_fine


def build_transfer(coarse_mesh: Mesh, coarse_dofs: DofMaps, fine_mesh: Mesh, fine_dofs: DofMaps) -> TransferOperator:
    if (
        fine_mesh.parent is None
        or fine_mesh.level != coarse_mesh.level + 1
        or len(fine_mesh.parent) != 4 * coarse_mesh.n_triangles
        or fine_mesh.n_coarse_vertices != coarse_mesh.n_vertices
    ):
        raise ValueError("fine mesh is not the refinement of the coarse mesh")

    coarse_coords = coarse_mesh.vertices[coarse_mesh.triangles]
    P2_full = _interpolation_matrix(
        fine_dofs.p2_cells, fine_dofs.p2_nodes, coarse_dofs.p2_cells, coarse_coords,
        fine_mesh.parent, p2_values, coarse_dofs.n_p2,
    )
    P_p = _interpolation_matrix(
        fine_dofs.p1_cells, fine_dofs.p1_nodes, coarse_dofs.p1_cells, coarse_coords,
        fine_mesh.parent, lambda b: b, coarse_dofs.n_pressure,
    )
    # coarse interior functions vanish on the boundary, so only interior
    # fine rows can be nonzero: dropping boundary rows loses nothing
    P_u = P2_full[fine_dofs.interior_p2][:, coarse_dofs.interior_p2].tocsr()

    Pv = sp.block_diag([P_u, P_u])
    matrix = sp.block_diag([Pv, P_p, Pv, P_p], format="csr")
    return TransferOperator(
        P_u=P_u,
        P_p=P_p,
        coarse=Layout(2 * coarse_dofs.n_interior, coarse_dofs.n_pressure),
        fine=Layout(2 * fine_dofs.n_interior, fine_dofs.n_pressure),
        matrix=matrix,
        P_p2=P2_full,
    )
