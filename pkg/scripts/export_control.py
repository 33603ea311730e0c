"""Export the k=3, alpha=1e-12 solution for both u_D radii and summarize
where the control energy sits.

    python3 scripts/export_control.py [--outdir results]
"""

import argparse
from pathlib import Path

import numpy as np

from stokesmg import bench
from stokesmg.assembly import TABLE_UD_RADIUS, UD_RADIUS, element_matrices_batch
from stokesmg.kkt import write_fields_csv


def control_energy(solver, x, level, alpha):
    lv = solver.hierarchy.levels[level]
    d, m = lv.dofs, lv.mesh
    f = solver.ops[level].layout.split(x)[2] / alpha
    n = d.n_interior
    full = np.zeros((2, d.n_p2))
    full[0, d.interior_p2], full[1, d.interior_p2] = f[:n], f[n:]
    m2 = element_matrices_batch(m.vertices[m.triangles])[0]
    loc = full[:, d.p2_cells]
    return m.vertices[m.triangles].mean(axis=1), np.einsum("ctj,tjk,ctk->t", loc, m2, loc)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--level", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=1e-12)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for R in (TABLE_UD_RADIUS, UD_RADIUS):
        cfg = bench.RunConfig(level=args.level, alpha=args.alpha, ud_radius=R)
        x, rep, s = bench.run(cfg)
        path = out / f"fields_k{args.level}_R{R}.csv"
        write_fields_csv(path, s.hierarchy.levels[args.level].dofs, s.ops[args.level].layout, x, args.alpha)
        c, e = control_energy(s, x, args.level, args.alpha)
        r = np.hypot(c[:, 0] - 0.5, c[:, 1] - 0.5)
        wall = np.min(np.stack([c[:, 0], c[:, 1], 1 - c[:, 0], 1 - c[:, 1]]), axis=0)
        print(f"R={R}: n={rep.n} q={rep.q:.3f}  ||f||^2 within 0.15 of circle {e[abs(r - R) <= 0.15].sum() / e.sum():.3f}, "
              f"within 0.15 of boundary {e[wall <= 0.15].sum() / e.sum():.3f}  -> {path}")


if __name__ == "__main__":
    main()
