"""Benchmark runs: single solves, the two iteration tables, spectrum checks."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assembly import TABLE_UD_RADIUS, UD_RADIUS, ProblemSpec
from .kkt import write_fields_csv
from .multigrid import ConvergenceReport, CycleConfig, MultigridSolver, build_hierarchy
from .smoother import DEFAULT_TAU, SmootherConfig, estimate_spectral_radius

MAX_LEVEL = 8
TABLE_NU = (1, 2, 4, 8)
TABLE_ALPHAS = (1.0, 1e-3, 1e-6, 1e-9, 1e-12)
WORKERS_ENV = "STOKESMG_WORKERS"


@dataclass(frozen=True)
class RunConfig:
    level: int = 4
    alpha: float = 1.0
    nu_pre: int = 2
    nu_post: int = 2
    cycle: str = "W"
    tau: float = DEFAULT_TAU
    eps: float = 1e-6
    ud_radius: float = UD_RADIUS
    report_path: str | None = None
    export_fields: str | None = None

    def __post_init__(self):
        if not 0 <= self.level <= MAX_LEVEL:
            raise ValueError(f"level must be in [0, {MAX_LEVEL}]")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")

    def cycle_config(self) -> CycleConfig:
        return CycleConfig(self.cycle, SmootherConfig(self.tau, self.nu_pre, self.nu_post))


def run(cfg: RunConfig) -> tuple[np.ndarray, ConvergenceReport, MultigridSolver]:
    hierarchy = build_hierarchy(cfg.level, ProblemSpec(alpha=cfg.alpha, ud_radius=cfg.ud_radius))
    solver = MultigridSolver(hierarchy, cfg.alpha, cfg.cycle_config())
    x, report = solver.solve(cfg.level, cfg.eps)
    return x, report, solver


def report_record(cfg: RunConfig, report: ConvergenceReport) -> dict:
    rec = report.as_dict()
    rec["ud_radius"] = cfg.ud_radius
    return rec


def cmd_solve(cfg: RunConfig) -> ConvergenceReport:
    """Solve once; append a JSON-lines record and optionally export fields."""
    x, report, solver = run(cfg)
    line = json.dumps(report_record(cfg, report))
    if cfg.report_path:
        with open(cfg.report_path, "a") as fh:
            fh.write(line + "\n")
    else:
        print(line)
    if cfg.export_fields:
        lv = solver.hierarchy.levels[cfg.level]
        write_fields_csv(cfg.export_fields, lv.dofs, solver.ops[cfg.level].layout, x, cfg.alpha)
    return report


def _run_report(cfg: RunConfig) -> ConvergenceReport:
    return run(cfg)[1]


def _map(cfgs: list[RunConfig], workers: int | None):
    workers = workers or int(os.environ.get(WORKERS_ENV, "1"))
    if workers <= 1:
        return [_run_report(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_report, cfgs))


def table_nu(level: int = 4, alpha: float = 1.0, nus=TABLE_NU, ud_radius: float = TABLE_UD_RADIUS,
             workers: int | None = None) -> list[dict]:
    cfgs = [RunConfig(level=level, alpha=alpha, nu_pre=nu, nu_post=nu, ud_radius=ud_radius) for nu in nus]
    return [
        {"nu_pre": c.nu_pre, "nu_post": c.nu_post, "n": r.n, "q": r.q, "converged": r.converged,
         "k": c.level, "alpha": c.alpha, "cycle": c.cycle, "tau": c.tau, "eps": c.eps, "ud_radius": c.ud_radius}
        for c, r in zip(cfgs, _map(cfgs, workers))
    ]


def table_alpha(k_max: int = 6, k_min: int = 3, alphas=TABLE_ALPHAS, ud_radius: float = TABLE_UD_RADIUS,
                workers: int | None = None) -> list[dict]:
    cfgs = [RunConfig(level=k, alpha=a, ud_radius=ud_radius) for k in range(k_min, k_max + 1) for a in alphas]
    return [
        {"k": c.level, "alpha": c.alpha, "n": r.n, "q": r.q, "converged": r.converged,
         "nu_pre": c.nu_pre, "nu_post": c.nu_post, "cycle": c.cycle, "tau": c.tau, "eps": c.eps,
         "ud_radius": c.ud_radius}
        for c, r in zip(cfgs, _map(cfgs, workers))
    ]


def check_spectrum(level: int, alpha: float, tau: float = DEFAULT_TAU, iterations: int = 300) -> dict:
    """Power-iteration estimate of rho(L^-1 A L^-1 A) and the smoother safety margin."""
    solver = MultigridSolver(build_hierarchy(level), alpha)
    rho = estimate_spectral_radius(solver.ops[level], solver.precs[level], iterations)
    return {"k": level, "alpha": alpha, "tau": tau, "rho": rho, "tau_rho": tau * rho,
            "safe": bool(tau * rho <= 2.0), "iterations": iterations}


def write_csv(rows: list[dict], path: str | Path | None) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text

