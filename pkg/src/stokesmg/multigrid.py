"""All-at-once multigrid for the reduced optimality system."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import AssembledBlocks, ProblemSpec, assemble
from .kkt import KktOperator
from .mesh import DofMaps, Mesh, build_dof_maps, build_hierarchy_meshes
from .precond import BlockPreconditioner, build_precond, norm_2k_residual
from .smoother import SmootherConfig, smooth
from .transfer import TransferOperator, build_transfer

log = logging.getLogger(__name__)

MAX_ITERATIONS = 500
MAX_DIRECT_LEVEL = 3


@dataclass(frozen=True, eq=False)
class Level:
    mesh: Mesh
    dofs: DofMaps
    blocks: AssembledBlocks


@dataclass(frozen=True, eq=False)
class Hierarchy:
    """Geometric levels 0..k with their (alpha-independent) matrices.

    ``transfers[i]`` maps level ``i`` to level ``i + 1``.
    """

    levels: list[Level]
    transfers: list[TransferOperator]

    @property
    def finest(self) -> int:
        return len(self.levels) - 1


def build_hierarchy(level: int, spec: ProblemSpec | None = None) -> Hierarchy:
    if level < 0:
        raise ValueError("level must be nonnegative")
    meshes = build_hierarchy_meshes(level)
    levels = []
    for m in meshes:
        dofs = build_dof_maps(m)
        levels.append(Level(m, dofs, assemble(m, dofs, spec)))
    transfers = [
        build_transfer(a.mesh, a.dofs, b.mesh, b.dofs) for a, b in zip(levels[:-1], levels[1:])
    ]
    return Hierarchy(levels, transfers)


class CoarseSolver:
    """Sparse LU of the operator bordered by the two zero-mean constraints.

    Solves ``[[A, C], [C^T, 0]] [x; y] = [f; 0]`` where the columns of ``C``
    are ``M_P 1`` placed in the p and mu blocks.

    The system is factorized after symmetric scaling by ``L^{-1/2}`` (the
    practical block diagonal unless ``scaling`` is given). Unscaled, the
    lambda rows carry entries of size 1/alpha and the pressure is lost to
    cancellation: at alpha = 1e-12 the error in the L-norm grows to about
    1e-7, against 1e-15 with the scaling.
    """

    def __init__(self, op: KktOperator, scaling: np.ndarray | None = None):
        self.op = op
        lay = op.layout
        if scaling is None:
            scaling = build_precond(op.blocks, op.alpha).diagonal
        self._d = 1.0 / np.sqrt(np.asarray(scaling, dtype=float))
        _, sp_, _, smu = lay.slices
        w = np.asarray(op.blocks.M_P.sum(axis=1)).ravel()
        C = np.zeros((lay.size, 2))
        C[sp_, 0] = w
        C[smu, 1] = w
        self.C = C
        Cs = C * self._d[:, None]
        Cs /= np.linalg.norm(Cs, axis=0)
        Ds = sp.diags(self._d)
        aug = sp.bmat([[Ds @ op.matrix @ Ds, sp.csr_matrix(Cs)], [sp.csr_matrix(Cs.T), None]], format="csc")
        try:
            self._lu = spla.splu(aug)
        except RuntimeError as exc:
            raise RuntimeError("augmented coarse operator is singular (inf-sup violated?)") from exc

    def solve(self, f: np.ndarray) -> np.ndarray:
        self.op.layout.check(f)
        sol = self._lu.solve(np.concatenate([self._d * f, np.zeros(2)]))
        if not np.all(np.isfinite(sol)):
            raise RuntimeError("coarse solve produced non-finite values")
        return self._d * sol[:-2]


def coarse_solve(solver: CoarseSolver, f: np.ndarray) -> np.ndarray:
    return solver.solve(f)


@dataclass(frozen=True)
class CycleConfig:
    cycle: str = "W"
    smoother_cfg: SmootherConfig = field(default_factory=SmootherConfig)
    coarsest_level: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cycle", self.cycle.upper())
        if self.cycle not in ("V", "W"):
            raise ValueError(f"cycle must be 'V' or 'W', got {self.cycle!r}")
        if self.coarsest_level != 0:
            raise ValueError("only coarsest_level = 0 is supported")

    @property
    def gamma(self) -> int:
        return 2 if self.cycle == "W" else 1


@dataclass
class ConvergenceReport:
    n: int
    residual_norms: list[float]
    q: float
    converged: bool
    level: int
    alpha: float
    nu_pre: int
    nu_post: int
    cycle: str
    tau: float
    eps: float

    def as_dict(self) -> dict:
        return {
            "k": self.level,
            "alpha": self.alpha,
            "nu_pre": self.nu_pre,
            "nu_post": self.nu_post,
            "cycle": self.cycle,
            "tau": self.tau,
            "eps": self.eps,
            "n": self.n,
            "q": self.q,
            "converged": self.converged,
            "residual_norms": self.residual_norms,
        }


class MultigridSolver:
    """Per-alpha operators, smoothers and coarse factorization over a hierarchy."""

    def __init__(self, hierarchy: Hierarchy, alpha: float, cfg: CycleConfig | None = None):
        self.hierarchy = hierarchy
        self.alpha = float(alpha)
        self.cfg = cfg or CycleConfig()
        self.ops = [KktOperator(lv.blocks, alpha) for lv in hierarchy.levels]
        self.precs: list[BlockPreconditioner] = [build_precond(lv.blocks, alpha) for lv in hierarchy.levels]
        c = self.cfg.coarsest_level
        self.coarse = CoarseSolver(self.ops[c], self.precs[c].diagonal)

    def cycle(self, level: int, x: np.ndarray, f: np.ndarray) -> np.ndarray:
        return mg_cycle(level, x, f, self, self.cfg)

    def residual_norm(self, level: int, x: np.ndarray, f: np.ndarray) -> float:
        return norm_2k_residual(self.precs[level], f - self.ops[level].apply(x))

    def solve(self, level: int | None = None, eps: float = 1e-6, max_iter: int = MAX_ITERATIONS,
              f: np.ndarray | None = None):
        """Iterate cycles from zero until the residual norm drops by ``eps``.

        Returns the deflated iterate and a :class:`ConvergenceReport`.
        """
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        k = self.hierarchy.finest if level is None else level
        op = self.ops[k]
        f = op.rhs() if f is None else f
        x = op.layout.zeros()
        r0 = self.residual_norm(k, x, f)
        norms = [r0]
        n = 0
        while norms[-1] > eps * r0 and n < max_iter:
            x = self.cycle(k, x, f)
            n += 1
            norms.append(self.residual_norm(k, x, f))
            if not np.isfinite(norms[-1]):
                break
        converged = bool(norms[-1] <= eps * r0)
        q = (norms[-1] / r0) ** (1.0 / n) if n > 0 and r0 > 0 else 1.0
        if not converged:
            log.warning("no convergence after %d cycles (k=%d, alpha=%g)", n, k, self.alpha)
        sc = self.cfg.smoother_cfg
        report = ConvergenceReport(
            n=n, residual_norms=norms, q=float(q), converged=converged, level=k, alpha=self.alpha,
            nu_pre=sc.nu_pre, nu_post=sc.nu_post, cycle=self.cfg.cycle, tau=sc.tau, eps=eps,
        )
        return op.deflate(x), report


def mg_cycle(level: int, x: np.ndarray, f: np.ndarray, solver: MultigridSolver, cfg: CycleConfig) -> np.ndarray:
    """One V- or W-cycle on ``level`` starting from ``x``."""
    op = solver.ops[level]
    op.layout.check(x)
    op.layout.check(f)
    if level == cfg.coarsest_level:
        return solver.coarse.solve(f)
    sc = cfg.smoother_cfg
    L = solver.precs[level]
    x = smooth(op, L, sc, x, f, sc.nu_pre)

    t = solver.hierarchy.transfers[level - 1]
    r_c = t.restrict(f - op.apply(x))
    if level - 1 == cfg.coarsest_level:
        e_c = solver.coarse.solve(r_c)
    else:
        e_c = np.zeros_like(r_c)
        for _ in range(cfg.gamma):
            e_c = mg_cycle(level - 1, e_c, r_c, solver, cfg)
    x = x + t.prolongate(e_c)

    return smooth(op, L, sc, x, f, sc.nu_post)


def solve(hierarchy: Hierarchy, level: int, alpha: float, cfg: CycleConfig | None = None, eps: float = 1e-6):
    return MultigridSolver(hierarchy, alpha, cfg).solve(level, eps)


def direct_reference_solve(hierarchy: Hierarchy, level: int, alpha: float,
                           max_level: int = MAX_DIRECT_LEVEL) -> np.ndarray:
    """Exact discrete solution with zero-mean p and mu (test oracle)."""
    if level > max_level:
        raise ValueError(f"direct solve refused above level {max_level} (got {level})")
    op = KktOperator(hierarchy.levels[level].blocks, alpha)
    return op.deflate(CoarseSolver(op).solve(op.rhs()))
