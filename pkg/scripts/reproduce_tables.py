"""Regenerate both iteration tables as CSV.

    python3 scripts/reproduce_tables.py [--kmax 5] [--outdir results] [--ud-radius 0.4]

Set STOKESMG_WORKERS to run the cells in parallel.
"""

import argparse
from pathlib import Path

from stokesmg import bench
from stokesmg.assembly import TABLE_UD_RADIUS


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kmax", type=int, default=5)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--ud-radius", type=float, default=TABLE_UD_RADIUS)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    rows = bench.table_nu(ud_radius=args.ud_radius)
    bench.write_csv(rows, out / "table_nu.csv")
    print("nu      n     q")
    for r in rows:
        print(f"{r['nu_pre']}+{r['nu_post']:<4} {r['n']:>3}  {r['q']:.3f}")

    rows = bench.table_alpha(k_max=args.kmax, ud_radius=args.ud_radius)
    bench.write_csv(rows, out / "table_alpha.csv")
    alphas = bench.TABLE_ALPHAS
    print("\nk  " + "".join(f"{a:>12g}" for a in alphas))
    for k in sorted({r["k"] for r in rows}):
        cells = {r["alpha"]: r for r in rows if r["k"] == k}
        print(f"{k}  " + "".join(f"{cells[a]['n']:>5} ({cells[a]['q']:.3f})" for a in alphas))


if __name__ == "__main__":
    main()
