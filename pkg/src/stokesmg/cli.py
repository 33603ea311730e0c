"""Command line: ``stokesmg {solve,table-nu,table-alpha,check-spectrum}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import bench
from .assembly import TABLE_UD_RADIUS, UD_RADIUS
from .smoother import DEFAULT_TAU


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stokesmg", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one multigrid solve and emit a JSON-lines report")
    s.add_argument("--level", type=int, default=4)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--nu-pre", type=int, default=2)
    s.add_argument("--nu-post", type=int, default=2)
    s.add_argument("--cycle", choices=["v", "w", "V", "W"], default="w")
    s.add_argument("--tau", type=float, default=DEFAULT_TAU)
    s.add_argument("--eps", type=float, default=1e-6)
    s.add_argument("--ud-radius", type=float, default=UD_RADIUS)
    s.add_argument("--report", help="append the JSON record here instead of stdout")
    s.add_argument("--export-fields", metavar="PATH", help="write node-wise CSV of u, p, lam, mu, f")

    t = sub.add_parser("table-nu", help="iterations and rates for nu = 1+1 .. 8+8 at k=4, alpha=1")
    t.add_argument("--level", type=int, default=4)
    t.add_argument("--ud-radius", type=float, default=TABLE_UD_RADIUS)
    t.add_argument("--out")

    a = sub.add_parser("table-alpha", help="iterations and rates over k and alpha for nu = 2+2")
    a.add_argument("--kmax", type=int, default=6)
    a.add_argument("--kmin", type=int, default=3)
    a.add_argument("--ud-radius", type=float, default=TABLE_UD_RADIUS)
    a.add_argument("--out")

    c = sub.add_parser("check-spectrum", help="report tau * rho(L^-1 A L^-1 A)")
    c.add_argument("--level", type=int, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--tau", type=float, default=DEFAULT_TAU)
    c.add_argument("--iterations", type=int, default=300)
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = bench.RunConfig(
                level=args.level, alpha=args.alpha, nu_pre=args.nu_pre, nu_post=args.nu_post,
                cycle=args.cycle.upper(), tau=args.tau, eps=args.eps, ud_radius=args.ud_radius,
                report_path=args.report, export_fields=args.export_fields,
            )
            return 0 if bench.cmd_solve(cfg).converged else 1
        if args.command == "table-nu":
            rows = bench.table_nu(level=args.level, ud_radius=args.ud_radius)
        elif args.command == "table-alpha":
            if args.kmax > bench.MAX_LEVEL:
                raise ValueError(f"--kmax above {bench.MAX_LEVEL} refused")
            rows = bench.table_alpha(k_max=args.kmax, k_min=args.kmin, ud_radius=args.ud_radius)
        else:
            rec = bench.check_spectrum(args.level, args.alpha, args.tau, args.iterations)
            print(json.dumps(rec))
            return 0 if rec["safe"] else 1
    except ValueError as exc:
        print(f"stokesmg: error: {exc}", file=sys.stderr)
        return 2
    text = bench.write_csv(rows, args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0 if all(r["converged"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
