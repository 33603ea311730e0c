"""Damped normal-equation smoother ``x <- x + tau L^-1 A L^-1 (f - A x)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TAU = 0.35


@dataclass(frozen=True)
class SmootherConfig:
    tau: float = DEFAULT_TAU
    nu_pre: int = 2
    nu_post: int = 2

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.nu_pre < 0 or self.nu_post < 0 or self.nu_pre + self.nu_post == 0:
            raise ValueError("need nu_pre, nu_post >= 0 and at least one smoothing step")


def smooth(op, L, cfg: SmootherConfig, x: np.ndarray, f: np.ndarray, steps: int) -> np.ndarray:
    """Apply ``steps`` smoothing sweeps to a copy of ``x``."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    x = np.array(x, dtype=float)
    A = op.matrix
    d = L.diagonal
    for _ in range(steps):
        r = f - A @ x
        x += cfg.tau * ((A @ (r / d)) / d)
    return x


def estimate_spectral_radius(op, L, iterations: int = 200, seed: int = 0) -> float:
    """Power-iteration estimate of rho(L^-1 A L^-1 A).

    Works with the symmetric ``B = L^-1/2 A L^-1/2``, for which the target
    is ``lambda_max(B)^2``; the ratios ``|B y_{m+1}| / |B y_m|`` increase
    monotonically towards ``|lambda_max(B)|``.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    A = op.matrix if hasattr(op, "matrix") else op
    s = 1.0 / np.sqrt(L.diagonal)
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(len(s))
    y /= np.linalg.norm(y)
    est = 0.0
    for _ in range(iterations):
        z = s * (A @ (s * y))
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        est = max(est, nz)
        y = z / nz
    return est**2
