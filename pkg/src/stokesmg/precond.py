"""Diagonal block matrices defining the smoother and the level norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import AssembledBlocks

PRACTICAL = "practical"
THEORETICAL = "theoretical"


@dataclass(frozen=True, eq=False)
class BlockPreconditioner:
    """``L = diag(A_hat, S_hat, A_hat/alpha, S_hat/alpha)`` stored as one vector.

    For the theoretical variant the four blocks are the mass-matrix diagonals
    scaled by ``phi``, ``alpha h^-2 / phi``, ``phi / alpha`` and ``h^-2 / phi``
    with ``phi = 1 + sqrt(alpha) h^-2``; ``A_hat``/``S_hat`` then hold the
    first two blocks.
    """

    A_hat: np.ndarray
    S_hat: np.ndarray
    alpha: float
    variant: str
    diagonal: np.ndarray
    phi: float | None = None

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.diagonal * x

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        return x / self.diagonal

    def as_matrix(self) -> sp.dia_matrix:
        return sp.diags(self.diagonal)


def mesh_parameter(level: int) -> float:
    """Level mesh size used by the theoretical variant: the P2 node spacing.

    Only its scaling with the level matters; the constant keeps the two
    variants within a factor 100 of each other.
    """
    return 2.0 ** -(level + 2)


def _diag(m) -> np.ndarray:
    return np.asarray(m.diagonal(), dtype=float)


def build_precond(blocks: AssembledBlocks, alpha: float, h: float | None = None, variant: str = PRACTICAL):
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    sqa = np.sqrt(alpha)
    phi = None
    if variant == PRACTICAL:
        A_hat = _diag(blocks.M_U) + sqa * _diag(blocks.K_U)
        D2 = blocks.D.multiply(blocks.D).tocsr()
        S_hat = alpha * (D2 @ (1.0 / A_hat))
        diagonal = np.concatenate([A_hat, S_hat, A_hat / alpha, S_hat / alpha])
    elif variant == THEORETICAL:
        if h is None:
            raise ValueError("the theoretical variant needs the mesh parameter h")
        phi = 1.0 + sqa / h**2
        mu_, mp = _diag(blocks.M_U), _diag(blocks.M_P)
        A_hat = phi * mu_
        S_hat = alpha / h**2 / phi * mp
        diagonal = np.concatenate([A_hat, S_hat, phi / alpha * mu_, mp / (h**2 * phi)])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not np.all(diagonal > 0) or not np.all(np.isfinite(diagonal)):
        raise ValueError("preconditioner has a non-positive diagonal entry; check the discretization")
    return BlockPreconditioner(A_hat=A_hat, S_hat=S_hat, alpha=float(alpha), variant=variant, diagonal=diagonal, phi=phi)


def apply_inverse(L: BlockPreconditioner, x: np.ndarray) -> np.ndarray:
    return L.apply_inverse(x)


def norm_0k(L: BlockPreconditioner, x: np.ndarray) -> float:
    """Energy norm sqrt(x^T L x)."""
    return float(np.sqrt(np.dot(x * L.diagonal, x)))


def norm_2k_residual(L: BlockPreconditioner, r: np.ndarray) -> float:
    """Dual norm sqrt(r^T L^{-1} r) of a residual."""
    return float(np.sqrt(np.dot(r / L.diagonal, r)))
