"""The reduced optimality system on one grid level.

Unknowns are ordered ``(u, p, lam, mu)``: velocity, pressure, adjoint
velocity, adjoint pressure. Algorithms work on the flat concatenated array;
:class:`StateVector` is the named view used at the API edges.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .assembly import AssembledBlocks


@dataclass(frozen=True)
class Layout:
    """Block sizes of a flat state vector."""

    n_u: int
    n_p: int

    @property
    def size(self) -> int:
        return 2 * (self.n_u + self.n_p)

    @property
    def slices(self) -> tuple[slice, slice, slice, slice]:
        a, b = self.n_u, self.n_p
        return (slice(0, a), slice(a, a + b), slice(a + b, 2 * a + b), slice(2 * a + b, 2 * (a + b)))

    def split(self, x: np.ndarray):
        self.check(x)
        return tuple(x[s] for s in self.slices)

    def join(self, u, p, lam, mu) -> np.ndarray:
        return np.concatenate([u, p, lam, mu])

    def check(self, x: np.ndarray) -> None:
        if x.shape != (self.size,):
            raise ValueError(f"state vector of shape {x.shape}, expected ({self.size},)")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.size)

    def constant_pressure_modes(self) -> np.ndarray:
        """Two columns spanning the kernel: constant p, constant mu."""
        modes = np.zeros((self.size, 2))
        _, sp_, _, smu = self.slices
        modes[sp_, 0] = 1.0
        modes[smu, 1] = 1.0
        return modes


@dataclass
class StateVector:
    u: np.ndarray
    p: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    @classmethod
    def from_array(cls, layout: Layout, x: np.ndarray) -> "StateVector":
        return cls(*(np.array(c) for c in layout.split(np.asarray(x, dtype=float))))

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.u, self.p, self.lam, self.mu])

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.u + other.u, self.p + other.p, self.lam + other.lam, self.mu + other.mu)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.u - other.u, self.p - other.p, self.lam - other.lam, self.mu - other.mu)

    def __mul__(self, c: float) -> "StateVector":
        return StateVector(c * self.u, c * self.p, c * self.lam, c * self.mu)

    __rmul__ = __mul__

    def dot(self, other: "StateVector") -> float:
        return float(self.to_array() @ other.to_array())


def _as_array(x) -> np.ndarray:
    return x.to_array() if isinstance(x, StateVector) else np.asarray(x, dtype=float)


class KktOperator:
    """Symmetric block operator

    ::

        [ M_U   0    K_U       D^T ] [u  ]
        [ 0     0    D         0   ] [p  ]
        [ K_U   D^T  -M_U/alpha  0 ] [lam]
        [ D     0    0         0   ] [mu ]
    """

    def __init__(self, blocks: AssembledBlocks, alpha: float):
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.blocks = blocks
        self.alpha = float(alpha)
        self.layout = Layout(blocks.n_velocity, blocks.n_pressure)
        M, K, D = blocks.M_U, blocks.K_U, blocks.D
        self.matrix = sp.bmat(
            [
                [M, None, K, D.T],
                [None, None, D, None],
                [K, D.T, -M / self.alpha, None],
                [D, None, None, None],
            ],
            format="csr",
        )
        # keep explicit (if zero) structure out; p-p and mu-mu blocks are empty
        self.matrix.eliminate_zeros()

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, x) -> np.ndarray:
        x = _as_array(x)
        self.layout.check(x)
        return self.matrix @ x

    def __matmul__(self, x):
        return self.apply(x)

    def rhs(self) -> np.ndarray:
        n = self.layout
        return n.join(self.blocks.rhs_u.copy(), np.zeros(n.n_p), np.zeros(n.n_u), np.zeros(n.n_p))

    def residual(self, x: np.ndarray, f: np.ndarray) -> np.ndarray:
        return f - self.apply(x)

    def deflate(self, x: np.ndarray) -> np.ndarray:
        """Remove the M_P-weighted mean from the p and mu components."""
        x = np.array(x, dtype=float)
        _, sp_, _, smu = self.layout.slices
        w = np.asarray(self.blocks.M_P.sum(axis=0)).ravel()
        for s in (sp_, smu):
            x[s] -= (w @ x[s]) / w.sum()
        return x


def recover_control(x, alpha: float, layout: Layout | None = None) -> np.ndarray:
    """Control coefficients f = lam / alpha (same velocity basis as lam)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if isinstance(x, StateVector):
        lam = x.lam
    else:
        if layout is None:
            raise ValueError("a Layout is needed to split a flat state vector")
        lam = layout.split(np.asarray(x, dtype=float))[2]
    return lam / alpha


def write_fields_csv(path: str | Path, dofs, layout: Layout, x: np.ndarray, alpha: float) -> None:
    """Node-wise export of u, p, lam, mu and the control f.

    Vector fields yield two rows per interior P2 node (``u_x``, ``u_y``, ...);
    boundary nodes are omitted since all velocity-type fields vanish there.
    """
    u, p, lam, mu = layout.split(np.asarray(x, dtype=float))
    f = lam / alpha
    n = dofs.n_interior
    nodes = dofs.interior_p2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "x", "y", "field", "value"])
        for name, vec in (("u", u), ("lam", lam), ("f", f)):
            for c, comp in enumerate("xy"):
                for i, node in enumerate(nodes):
                    X, Y = dofs.p2_nodes[node]
                    w.writerow([int(node), X, Y, f"{name}_{comp}", vec[c * n + i]])
        for name, vec in (("p", p), ("mu", mu)):
            for node, (X, Y) in enumerate(dofs.p1_nodes):
                w.writerow([node, X, Y, name, vec[node]])
