"""Taylor-Hood (P2 velocity / P1 pressure) matrices for the Stokes control problem."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .mesh import DofMaps, Mesh

# Strang-Fix / Dunavant 6-point rule, exact for degree 4; weights sum to 1.
_A1, _B1, _W1 = 0.44594849091596489, 0.10810301816807023, 0.22338158967801147
_A2, _B2, _W2 = 0.091576213509770743, 0.81684757298045851, 0.10995174365532187
QUAD_BARY = np.array(
    [
        [_B1, _A1, _A1], [_A1, _B1, _A1], [_A1, _A1, _B1],
        [_B2, _A2, _A2], [_A2, _B2, _A2], [_A2, _A2, _B2],
    ]
)
QUAD_WEIGHTS = np.array([_W1] * 3 + [_W2] * 3)

_DEGENERATE_AREA = 1e-14


def p2_values(bary: np.ndarray) -> np.ndarray:
    """P2 shape functions at barycentric points, shape (..., 6)."""
    l0, l1, l2 = bary[..., 0], bary[..., 1], bary[..., 2]
    return np.stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l0 * l1,
            4 * l1 * l2,
            4 * l2 * l0,
        ],
        axis=-1,
    )


def _p2_bary_derivatives(bary: np.ndarray) -> np.ndarray:
    """d N_i / d lambda_j at each point, shape (nq, 6, 3)."""
    l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
    z = np.zeros_like(l0)
    return np.stack(
        [
            np.stack([4 * l0 - 1, z, z], axis=-1),
            np.stack([z, 4 * l1 - 1, z], axis=-1),
            np.stack([z, z, 4 * l2 - 1], axis=-1),
            np.stack([4 * l1, 4 * l0, z], axis=-1),
            np.stack([z, 4 * l2, 4 * l1], axis=-1),
            np.stack([4 * l2, z, 4 * l0], axis=-1),
        ],
        axis=1,
    )


def _geometry(coords: np.ndarray):
    """Signed areas and barycentric gradients for a batch of triangles."""
    d1 = coords[:, 1] - coords[:, 0]
    d2 = coords[:, 2] - coords[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * det
    if np.any(area <= _DEGENERATE_AREA):
        bad = int(np.flatnonzero(area <= _DEGENERATE_AREA)[0])
        raise ValueError(f"degenerate or inverted triangle {bad} (area {area[bad]:.3e})")
    # rows of J^{-1} are grad(lambda_1), grad(lambda_2)
    g1 = np.stack([d2[:, 1], -d2[:, 0]], axis=-1) / det[:, None]
    g2 = np.stack([-d1[:, 1], d1[:, 0]], axis=-1) / det[:, None]
    grads = np.stack([-g1 - g2, g1, g2], axis=1)  # (nt, 3, 2)
    return area, grads


def element_matrices_batch(coords: np.ndarray):
    """Local matrices for triangles ``coords`` of shape (nt, 3, 2).

    Returns ``(p2_mass, p2_stiffness, p1_mass, div)`` with shapes
    (nt,6,6), (nt,6,6), (nt,3,3) and (nt,3,12). ``div[t, i, 6*c + j]`` is
    the integral of d(phi_j)/d(x_c) * psi_i.
    """
    coords = np.asarray(coords, dtype=float)
    area, grads = _geometry(coords)
    w = QUAD_WEIGHTS
    n2 = p2_values(QUAD_BARY)  # (nq, 6)
    n1 = QUAD_BARY  # P1 shape functions are the barycentrics
    dn = np.einsum("qij,tjd->tqid", _p2_bary_derivatives(QUAD_BARY), grads)  # (nt,nq,6,2)

    mass2 = area[:, None, None] * np.einsum("q,qi,qj->ij", w, n2, n2)[None]
    stiff2 = area[:, None, None] * np.einsum("q,tqid,tqjd->tij", w, dn, dn)
    mass1 = area[:, None, None] * np.einsum("q,qi,qj->ij", w, n1, n1)[None]
    div = area[:, None, None, None] * np.einsum("q,qi,tqjd->tidj", w, n1, dn)
    return mass2, stiff2, mass1, div.reshape(len(coords), 3, 12)


def element_matrices(triangle_coords):
    """Local P2 mass, P2 stiffness, P1 mass and divergence blocks of one triangle."""
    m2, k2, m1, d = element_matrices_batch(np.asarray(triangle_coords, dtype=float)[None])
    return m2[0], k2[0], m1[0], d[0]


UD_RADIUS = 0.8
# cutoff that reproduces the published iteration tables (see README)
TABLE_UD_RADIUS = 0.4


def evaluate_u_D(point, radius: float = UD_RADIUS) -> np.ndarray:
    """Desired velocity: rigid rotation about (1/2, 1/2), zero outside ``radius``.

    Accepts a single point or an array of points with trailing dimension 2.
    With the default radius 4/5 the whole unit square lies inside the disc.
    """
    pt = np.asarray(point, dtype=float)
    x, y = pt[..., 0], pt[..., 1]
    inside = np.hypot(x - 0.5, y - 0.5) < radius
    return np.stack([np.where(inside, y - 0.5, 0.0), np.where(inside, 0.5 - x, 0.0)], axis=-1)


@dataclass(frozen=True)
class ProblemSpec:
    """Problem data. ``u_D`` overrides the rotational field when given."""

    alpha: float = 1.0
    ud_radius: float = UD_RADIUS
    u_D: Callable[[np.ndarray], np.ndarray] | None = None
    quadrature_order: int = 4

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.quadrature_order > 4:
            raise ValueError("only the degree-4 rule is available")
        if not self.ud_radius > 0:
            raise ValueError("ud_radius must be positive")

    def desired(self, points: np.ndarray) -> np.ndarray:
        if self.u_D is not None:
            return self.u_D(points)
        return evaluate_u_D(points, self.ud_radius)


@dataclass(frozen=True, eq=False)
class AssembledBlocks:
    """Dirichlet-reduced global matrices on one level (independent of alpha)."""

    M_U: sp.csr_matrix
    K_U: sp.csr_matrix
    M_P: sp.csr_matrix
    D: sp.csr_matrix
    rhs_u: np.ndarray
    # unreduced scalar P2 matrices, kept for diagnostics and field export
    p2_mass: sp.csr_matrix = field(repr=False)
    p2_stiffness: sp.csr_matrix = field(repr=False)

    @property
    def n_velocity(self) -> int:
        return self.M_U.shape[0]

    @property
    def n_pressure(self) -> int:
        return self.M_P.shape[0]


def _scatter(cells_r, cells_c, local, shape):
    nt, nr = cells_r.shape
    nc = cells_c.shape[1]
    rows = np.repeat(cells_r, nc, axis=1).ravel()
    cols = np.tile(cells_c, (1, nr)).ravel()
    mat = sp.coo_matrix((local.reshape(nt, -1).ravel(), (rows, cols)), shape=shape).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def assemble(mesh: Mesh, dofs: DofMaps, spec: ProblemSpec | None = None) -> AssembledBlocks:
    spec = spec or ProblemSpec()
    coords = mesh.vertices[mesh.triangles]
    mass2, stiff2, mass1, div = element_matrices_batch(coords)

    n2, n1 = dofs.n_p2, dofs.n_pressure
    M2 = _scatter(dofs.p2_cells, dofs.p2_cells, mass2, (n2, n2))
    K2 = _scatter(dofs.p2_cells, dofs.p2_cells, stiff2, (n2, n2))
    M_P = _scatter(dofs.p1_cells, dofs.p1_cells, mass1, (n1, n1))
    Dx = _scatter(dofs.p1_cells, dofs.p2_cells, div[:, :, :6], (n1, n2))
    Dy = _scatter(dofs.p1_cells, dofs.p2_cells, div[:, :, 6:], (n1, n2))

    inner = dofs.interior_p2
    M_in = M2[inner][:, inner]
    K_in = K2[inner][:, inner]
    M_U = sp.block_diag([M_in, M_in], format="csr")
    K_U = sp.block_diag([K_in, K_in], format="csr")
    D = sp.hstack([Dx[:, inner], Dy[:, inner]], format="csr")

    rhs = load_vector(mesh, dofs, spec.desired)
    return AssembledBlocks(M_U=M_U, K_U=K_U, M_P=M_P, D=D, rhs_u=rhs, p2_mass=M2, p2_stiffness=K2)


def load_vector(mesh: Mesh, dofs: DofMaps, u_D=evaluate_u_D) -> np.ndarray:
    """(u_D, phi_j) for all interior velocity basis functions, component-blocked."""
    coords = mesh.vertices[mesh.triangles]
    area = mesh.signed_areas()
    pts = np.einsum("qk,tkd->tqd", QUAD_BARY, coords)
    vals = u_D(pts)  # (nt, nq, 2)
    n2 = p2_values(QUAD_BARY)
    local = area[:, None, None] * np.einsum("q,tqc,qi->tci", QUAD_WEIGHTS, vals, n2)
    out = []
    for c in range(2):
        full = np.bincount(dofs.p2_cells.ravel(), weights=local[:, c, :].ravel(), minlength=dofs.n_p2)
        out.append(full[dofs.interior_p2])
    return np.concatenate(out)


def write_coo(matrix, path: str | Path) -> None:
    """Write ``row col value`` lines (0-based) for cross-checking elsewhere."""
    coo = sp.coo_matrix(matrix)
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {float(v)!r}\n")
