"""Benchmark harness: accuracy metric, single runs, work-precision sweeps.

Accuracy is reported as the number of mixed error significant computed
digits,

    mescd = max{0, -log10 max_i ||(yref_i - y_i) ./ (1 + |yref_i|)||_inf},

a scale-aware digit count over shared mesh nodes, capped at 16 (double
precision has nothing beyond that to report).  Wall time is measured
around the stepping loop only; mesh and table precomputation is timed
separately, so comparisons stay meaningful when tables are cached.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .fractional import TailKernelConfig, build_tables, load_tables, save_tables
from .mesh import build_mixed_mesh
from .problems import BenchProblem, get_problem, load_problem_file
from .quadrature import gauss_jacobi_rule, jacobi_recurrence
from .solver import SolutionTrajectory, SolverConfig, solve

__all__ = ["WpdRecord", "mescd", "run", "wpd", "write_wpd_csv"]

MESCD_CAP = 16.0


@dataclass
class WpdRecord:
    """One work-precision data point."""

    problem: str
    s: int
    k: int
    N: int
    n: int
    nu: int
    nodes: int
    mescd: float
    solve_seconds: float
    setup_seconds: float
    status: str = "ok"


def mescd(computed: np.ndarray, reference: np.ndarray) -> float:
    """Mixed error significant computed digits between trajectories on shared nodes."""
    computed = np.asarray(computed, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if computed.shape != reference.shape:
        raise ValueError(
            f"trajectories must share mesh nodes; shapes {computed.shape} vs {reference.shape}"
        )
    err = np.max(np.abs((reference - computed) / (1.0 + np.abs(reference))))
    if err == 0.0:
        return MESCD_CAP
    return float(min(MESCD_CAP, max(0.0, -np.log10(err))))


def _resolve(problem) -> BenchProblem:
    if isinstance(problem, BenchProblem):
        return problem
    problem = str(problem)
    if problem.endswith(".json"):
        return load_problem_file(problem)
    return get_problem(problem)


def run(
    problem,
    T: float | None = None,
    N: int = 10,
    n: int = 1,
    nu: int = 1,
    s: int = 22,
    k: int = 22,
    out_dir=None,
    cache_dir=None,
    config: SolverConfig | None = None,
    kernel_cfg: TailKernelConfig | None = None,
) -> tuple[SolutionTrajectory, WpdRecord]:
    """Build mesh and tables, solve, optionally export, and record timings.

    ``problem`` is a registry name, a JSON problem file path, or a
    BenchProblem.  When the problem has an exact solution the record's mescd
    compares against it on all nodes; otherwise mescd is NaN (use wpd with a
    reference recipe for self-referenced accuracy).
    """
    bench = _resolve(problem)
    spec = bench.spec
    if T is None:
        T = bench.T_default

    t_setup = time.perf_counter()
    mesh = build_mixed_mesh(T, N, n, nu)
    table = jacobi_recurrence(spec.alpha, max(k + 1, s + 1))
    rule = gauss_jacobi_rule(table, k, s)
    tables = None
    if cache_dir is not None:
        tables = load_tables(cache_dir, spec.alpha, k, s, mesh.N, mesh.n, mesh.nu, mesh.r)
    if tables is None:
        tables = build_tables(mesh, rule, table, kernel_cfg)
        if cache_dir is not None:
            save_tables(tables, cache_dir)
    setup_seconds = time.perf_counter() - t_setup

    t_solve = time.perf_counter()
    trajectory = solve(spec, mesh, rule, tables, config)
    solve_seconds = time.perf_counter() - t_solve

    accuracy = float("nan")
    if bench.exact is not None:
        accuracy = mescd(trajectory.values, bench.exact(trajectory.times))

    record = WpdRecord(
        problem=bench.name, s=s, k=k, N=N, n=n, nu=mesh.nu, nodes=mesh.node_count,
        mescd=accuracy, solve_seconds=solve_seconds, setup_seconds=setup_seconds,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        trajectory.to_csv(out / "trajectory.csv")
        trajectory.to_json(out / "run.json", extra={"record": record_as_json(record)})
    return trajectory, record


def record_as_json(record: WpdRecord) -> dict:
    """Record dict with NaN replaced by None, safe for strict JSON."""
    out = asdict(record)
    for key, value in out.items():
        if isinstance(value, float) and np.isnan(value):
            out[key] = None
    return out


def _reference_values(bench: BenchProblem, recipe: str, rows, T: float, s: int, k: int):
    """Reference for a WPD sweep: exact callable, or one fine run compared at t = T."""
    if recipe == "exact":
        if bench.exact is None:
            raise ValueError(f"problem {bench.name} has no exact solution")
        return "exact", bench.exact
    if recipe.startswith("fine:"):
        factor = int(recipe.split(":", 1)[1])
        finest = max(rows, key=lambda row: row["N"])
        ref_traj, _ = run(
            bench, T=T, N=finest["N"] * factor, n=finest["n"], nu=finest["nu"], s=s, k=k,
        )
        return "endpoint", ref_traj.values[-1]
    raise ValueError(f"unknown reference recipe {recipe!r}; use 'exact' or 'fine:<factor>'")


def wpd(
    problem,
    rows=None,
    reference: str | None = None,
    T: float | None = None,
    s: int = 22,
    k: int = 22,
    cache_dir=None,
) -> list[WpdRecord]:
    """One record per parameter row; per-row failures are recorded, the sweep continues.

    With an exact reference the mescd covers every node of each run; with a
    ``fine:<factor>`` recipe a single reference run at factor times the
    finest N is compared at the endpoint t = T.
    """
    bench = _resolve(problem)
    if rows is None:
        rows = bench.wpd_rows
    if T is None:
        T = bench.T_default
    if reference is None:
        reference = bench.reference
    records: list[WpdRecord] = []
    if not rows:
        return records
    mode, ref = _reference_values(bench, reference, rows, T, s, k)
    for row in rows:
        try:
            trajectory, record = run(
                bench, T=T, N=row["N"], n=row["n"], nu=row["nu"],
                s=row.get("s", s), k=row.get("k", k), cache_dir=cache_dir,
            )
            if mode == "exact":
                record.mescd = mescd(trajectory.values, ref(trajectory.times))
            else:
                record.mescd = mescd(trajectory.values[-1:], ref[None, :])
            records.append(record)
        except Exception as exc:  # noqa: BLE001 - per-row failures must not stop the sweep
            records.append(WpdRecord(
                problem=bench.name, s=row.get("s", s), k=row.get("k", k),
                N=row["N"], n=row["n"], nu=row["nu"], nodes=0,
                mescd=float("nan"), solve_seconds=float("nan"),
                setup_seconds=float("nan"), status=f"failed: {exc}",
            ))
    return records


def write_wpd_csv(records, path) -> None:
    fields = ["problem", "s", "k", "N", "n", "nu", "nodes",
              "mescd", "solve_seconds", "setup_seconds", "status"]
    with open(path, "w") as fh:
        fh.write(",".join(fields) + "\n")
        for rec in records:
            row = asdict(rec)
            fh.write(",".join(str(row[f]) for f in fields) + "\n")
