"""Command-line interface: solve, wpd, stability, tables."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import record_as_json, run, wpd, write_wpd_csv
from .fractional import build_tables, save_tables
from .mesh import build_mixed_mesh
from .problems import get_problem, load_problem_file
from .quadrature import gauss_jacobi_rule, jacobi_recurrence
from .stability import region_boundary, write_region_csv


def _add_mesh_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--T", type=float, default=None, help="final time (problem default if omitted)")
    p.add_argument("--N", type=int, required=True, help="uniform step count over [0, T]")
    p.add_argument("--n", type=int, default=1, help="uniform cells covered by the graded prefix")
    p.add_argument("--nu", type=int, default=1, help="graded step count (may be increased)")
    p.add_argument("--s", type=int, default=22, help="expansion degree count")
    p.add_argument("--k", type=int, default=22, help="quadrature node count (k >= s)")


def _cmd_solve(args) -> int:
    trajectory, record = run(
        args.problem, T=args.T, N=args.N, n=args.n, nu=args.nu, s=args.s, k=args.k,
        out_dir=args.out, cache_dir=args.cache,
    )
    rec = record_as_json(record)
    summary = {
        "mesh": trajectory.mesh.echo(),
        "mescd_vs_exact": rec["mescd"],
        "solve_seconds": record.solve_seconds,
        "setup_seconds": record.setup_seconds,
        "out_dir": args.out,
    }
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_wpd(args) -> int:
    rows = None
    if args.grid is not None:
        grid = json.loads(Path(args.grid).read_text())
        rows = grid["rows"] if isinstance(grid, dict) else grid
    records = wpd(args.problem, rows=rows, reference=args.ref, T=args.T,
                  s=args.s, k=args.k, cache_dir=args.cache)
    out = args.out or "wpd.csv"
    write_wpd_csv(records, out)
    print(f"wrote {len(records)} records to {out}")
    return 0


def _cmd_stability(args) -> int:
    nx, ny = (int(v) for v in args.grid.split("x"))
    window = tuple(float(v) for v in args.window.split(","))
    if len(window) != 4:
        raise ValueError("window must be re0,re1,im0,im1")
    region = region_boundary(args.s, args.alpha, window=window, grid_shape=(nx, ny),
                             include_ml=not args.no_ml)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = f"s{args.s}_alpha{args.alpha:g}"
    grid_path = out / f"stability_grid_{tag}.csv"
    boundary_path = out / f"stability_boundary_{tag}.csv"
    write_region_csv(region, grid_path, boundary_path)
    print(f"wrote {grid_path} and {boundary_path}")
    return 0


def _cmd_tables(args) -> int:
    bench = load_problem_file(args.problem) if str(args.problem).endswith(".json") \
        else get_problem(args.problem)
    alpha = bench.spec.alpha
    T = args.T if args.T is not None else bench.T_default
    mesh = build_mixed_mesh(T, args.N, args.n, args.nu)
    table = jacobi_recurrence(alpha, max(args.k + 1, args.s + 1))
    rule = gauss_jacobi_rule(table, args.k, args.s)
    tables = build_tables(mesh, rule, table)
    path = save_tables(tables, args.cache)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdeint",
        description="Collocation solver for Caputo fractional initial value problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem on a mixed mesh")
    p.add_argument("--problem", required=True, help="registry name or problem JSON path")
    _add_mesh_args(p)
    p.add_argument("--out", default=None, help="directory for trajectory.csv and run.json")
    p.add_argument("--cache", default=None, help="integral-table cache directory")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("wpd", help="work-precision sweep over a parameter grid")
    p.add_argument("--problem", required=True)
    p.add_argument("--grid", default=None, help="JSON file with parameter rows (problem default if omitted)")
    p.add_argument("--ref", default=None, help="'exact' or 'fine:<factor>' (problem default if omitted)")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--s", type=int, default=22)
    p.add_argument("--k", type=int, default=22)
    p.add_argument("--out", default=None, help="output CSV path (default wpd.csv)")
    p.add_argument("--cache", default=None)
    p.set_defaults(func=_cmd_wpd)

    p = sub.add_parser("stability", help="stability-region grid and boundary data")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--grid", default="800x800", help="grid resolution <nx>x<ny>")
    p.add_argument("--window", default="-15,5,-10,10", help="re0,re1,im0,im1")
    p.add_argument("--no-ml", action="store_true", help="skip the Mittag-Leffler grid")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("tables", help="precompute and cache integral tables")
    p.add_argument("--problem", required=True, help="registry name or problem JSON (fixes alpha)")
    _add_mesh_args(p)
    p.add_argument("--cache", required=True, help="cache directory")
    p.set_defaults(func=_cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
