"""All-at-once geometric multigrid for distributed Stokes velocity-tracking control."""

from .assembly import ProblemSpec, assemble, element_matrices, evaluate_u_D
from .kkt import KktOperator, Layout, StateVector, recover_control
from .mesh import DofMaps, Mesh, build_coarse_mesh, build_dof_maps, refine
from .multigrid import (
    ConvergenceReport,
    CoarseSolver,
    CycleConfig,
    Hierarchy,
    MultigridSolver,
    build_hierarchy,
    direct_reference_solve,
    mg_cycle,
    solve,
)
from .precond import BlockPreconditioner, build_precond, norm_0k, norm_2k_residual
from .smoother import SmootherConfig, estimate_spectral_radius, smooth
from .transfer import TransferOperator, build_transfer

__version__ = "0.1.0"
