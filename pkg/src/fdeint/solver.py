"""Time stepping for Caputo fractional initial value problems.

Each mesh interval carries a degree-(s-1) expansion of the vector field in
the orthonormal basis; the s expansion coefficients per interval are the
only unknowns.  A step assembles the memory term (the full contribution of
all previous intervals, evaluated through the precomputed kernel tables),
then solves the fixed-point system

    G = P_s^T Omega f(phi + h^a I_s^a G)

for the coefficient block G by simplified Newton with the Jacobian frozen
at the left endpoint.  The step's endpoint value follows from the zeroth
coefficient alone, since the fractional integral of every higher basis
polynomial vanishes at the right endpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import gamma

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .fractional import FractionalTables
from .mesh import MixedMesh, step_descriptor
from .quadrature import QuadratureRule

__all__ = [
    "ProblemSpec",
    "SolverConfig",
    "CoefficientHistory",
    "SolutionTrajectory",
    "NewtonError",
    "taylor_term",
    "memory_term_graded",
    "memory_term_uniform",
    "solve_step",
    "advance_step",
    "solve",
]


class NewtonError(RuntimeError):
    """Raised when the per-step nonlinear solve fails to converge."""

    def __init__(self, message: str, step_kind: str, step_index: int, final_update: float):
        super().__init__(message)
        self.step_kind = step_kind
        self.step_index = step_index
        self.final_update = final_update


@dataclass
class ProblemSpec:
    """A Caputo initial value problem y^(alpha) = f(t, y).

    ``f(t, y)`` must accept a scalar t with a state of shape (m,) and a
    batch of k times with states of shape (k, m), returning the same shape.
    ``jacobian(t, y)`` returns the m x m matrix df/dy; if None, a forward
    difference approximation is used.  ``y0`` holds one row per initial
    derivative, ceil(alpha) rows in total.
    """

    alpha: float
    dimension: int
    f: object
    jacobian: object | None
    y0: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        self.y0 = np.atleast_2d(np.asarray(self.y0, dtype=float))
        if self.y0.shape != (self.ell, self.dimension):
            raise ValueError(
                f"y0 must have shape (ceil(alpha), m) = ({self.ell}, {self.dimension}), "
                f"got {self.y0.shape}"
            )

    @property
    def ell(self) -> int:
        return max(int(math.ceil(self.alpha)), 1)


@dataclass(frozen=True)
class SolverConfig:
    """Nonlinear-solve controls.

    ``jacobian_refresh`` picks the frozen-Jacobian policy: "adaptive"
    re-freezes at the current iterate whenever the update is not at least
    halving (the left-endpoint Jacobian can be degenerate, e.g. for
    root-type nonlinearities starting at 0), "step" keeps the left-endpoint
    matrix for the whole step.
    """

    newton_rel_tol: float = 1e-14
    newton_abs_tol: float = 1e-15
    max_iterations: int = 50
    jacobian_refresh: str = "adaptive"
    keep_stages: bool = False

    def __post_init__(self):
        if self.newton_rel_tol <= 0 or self.newton_abs_tol <= 0:
            raise ValueError("Newton tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.jacobian_refresh not in ("adaptive", "step"):
            raise ValueError(f"unsupported jacobian_refresh policy {self.jacobian_refresh!r}")


@dataclass
class CoefficientHistory:
    """Per-interval coefficient blocks, the solver's entire state.

    ``graded[i-1]`` is the (s, m) block of interval i = 1..nu and
    ``uniform[j-n-1]`` the block of uniform step j = n+1..N.  Blocks are
    append-only.
    """

    graded: list = field(default_factory=list)
    uniform: list = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.graded) + len(self.uniform)


@dataclass
class SolutionTrajectory:
    """Solution values at the mesh nodes plus per-step diagnostics."""

    times: np.ndarray
    values: np.ndarray
    iterations: np.ndarray
    final_updates: np.ndarray
    history: CoefficientHistory
    mesh: MixedMesh
    problem_name: str = ""
    stage_times: list | None = None
    stages: list | None = None

    def to_csv(self, path) -> None:
        m = self.values.shape[1]
        header = "t," + ",".join(f"y_{i+1}" for i in range(m))
        data = np.column_stack([self.times, self.values])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")

    def to_json(self, path, extra: dict | None = None) -> None:
        payload = {
            "problem": self.problem_name,
            "mesh": self.mesh.echo(),
            "times": self.times.tolist(),
            "values": self.values.tolist(),
            "diagnostics": {
                "newton_iterations": self.iterations.tolist(),
                "newton_final_updates": self.final_updates.tolist(),
            },
        }
        if extra:
            payload.update(extra)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


def taylor_term(problem: ProblemSpec, t) -> np.ndarray:
    """Initial-condition polynomial sum_{j<ell} t^j/j! y0[j]; (m,) or (n, m)."""
    scalar = np.isscalar(t) or np.ndim(t) == 0
    tv = np.atleast_1d(np.asarray(t, dtype=float))
    ell = problem.ell
    out = np.repeat(problem.y0[ell - 1][None, :] / gamma(ell), tv.size, axis=0)
    for j in range(ell - 2, -1, -1):
        out = out * tv[:, None] + problem.y0[j] / gamma(j + 1)
    return out[0] if scalar else out


def _graded_h_alpha(mesh: MixedMesh, alpha: float, count: int) -> np.ndarray:
    i = np.arange(1, count + 1, dtype=float)
    return (mesh.h1 * mesh.r ** (i - 1.0)) ** alpha


def _memory_graded(
    i: int,
    history: CoefficientHistory,
    tables: FractionalTables,
    problem: ProblemSpec,
    mesh: MixedMesh,
    rule: QuadratureRule,
) -> tuple[np.ndarray, np.ndarray]:
    """Memory term of graded step i at the abscissae, (k, m), and at c = 1, (m,)."""
    if len(history.graded) < i - 1:
        raise RuntimeError(f"history is missing graded blocks before step {i}")
    h_i = mesh.graded_step_size(i)
    t_left = mesh.times[i - 1]
    phi = taylor_term(problem, t_left + rule.c * h_i)
    phi_end = taylor_term(problem, float(mesh.times[i]))
    if i > 1:
        w = _graded_h_alpha(mesh, tables.alpha, i - 1)
        W = w[:, None, None] * np.asarray(history.graded[: i - 1])   # (i-1, s, m)
        sel = slice(i - 2, None, -1)                                 # distance i-mu for mu ascending
        phi = phi + np.tensordot(tables.J_graded[sel], W, axes=([0, 2], [0, 1]))
        phi_end = phi_end + np.einsum("ds,dsm->m", tables.J_graded_end[sel], W)
    return phi, phi_end


def _memory_uniform(
    j: int,
    history: CoefficientHistory,
    tables: FractionalTables,
    problem: ProblemSpec,
    mesh: MixedMesh,
    rule: QuadratureRule,
) -> tuple[np.ndarray, np.ndarray]:
    """Memory term of uniform step j at the abscissae, (k, m), and at c = 1, (m,)."""
    n, nu = mesh.n, mesh.nu
    if len(history.graded) != nu or len(history.uniform) < j - n - 1:
        raise RuntimeError(f"history is incomplete before uniform step {j}")
    t_left = mesh.times[nu + (j - 1 - n)]
    phi = taylor_term(problem, t_left + rule.c * mesh.h)
    phi_end = taylor_term(problem, float(mesh.times[nu + j - n]))

    wg = _graded_h_alpha(mesh, tables.alpha, nu)
    Wg = wg[:, None, None] * np.asarray(history.graded)              # (nu, s, m)
    col = j - 1 - n
    phi = phi + np.tensordot(tables.J_cross[:, col], Wg, axes=([0, 2], [0, 1]))
    phi_end = phi_end + np.einsum("ds,dsm->m", tables.J_cross_end[:, col], Wg)

    n_hist = j - 1 - n
    if n_hist > 0:
        Wu = mesh.h ** tables.alpha * np.asarray(history.uniform[:n_hist])
        sel = slice(n_hist - 1, None, -1)
        phi = phi + np.tensordot(tables.J_uniform[sel], Wu, axes=([0, 2], [0, 1]))
        phi_end = phi_end + np.einsum("ds,dsm->m", tables.J_uniform_end[sel], Wu)
    return phi, phi_end


def memory_term_graded(i, history, tables, problem, mesh, rule) -> np.ndarray:
    """Memory values of graded step i = 1..nu at the quadrature abscissae."""
    return _memory_graded(i, history, tables, problem, mesh, rule)[0]


def memory_term_uniform(j, history, tables, problem, mesh, rule) -> np.ndarray:
    """Memory values of uniform step j = n+1..N at the quadrature abscissae."""
    return _memory_uniform(j, history, tables, problem, mesh, rule)[0]


def _fd_jacobian(problem: ProblemSpec, t: float, y: np.ndarray) -> np.ndarray:
    m = problem.dimension
    J = np.empty((m, m))
    f0 = np.asarray(problem.f(t, y), dtype=float)
    for col in range(m):
        step = math.sqrt(np.finfo(float).eps) * (1.0 + abs(y[col]))
        yp = y.copy()
        yp[col] += step
        J[:, col] = (np.asarray(problem.f(t, yp), dtype=float) - f0) / step
    return J


def solve_step(
    phi: np.ndarray,
    h_step: float,
    t_left: float,
    y_left: np.ndarray,
    problem: ProblemSpec,
    rule: QuadratureRule,
    tables: FractionalTables,
    config: SolverConfig,
    guess: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, int, float]:
    """Solve one step's coefficient block.

    Returns (G, Y, iterations, final_update) where G is the (s, m) block and
    Y the (k, m) stage values at convergence.  Simplified Newton: the matrix
    I - h^a (P^T Omega I^a) (x) J_f(t_left, y_left) is factored once and
    reused for every iteration of the step.
    """
    alpha = tables.alpha
    s, k, m = tables.s, tables.k, problem.dimension
    q = h_step ** alpha
    Q = rule.P.T * rule.b
    C = Q @ tables.I_local

    def jac_at(t, y):
        if problem.jacobian is not None:
            return np.asarray(problem.jacobian(t, y), dtype=float)
        return _fd_jacobian(problem, t, y)

    def factor(J0):
        return lu_factor(np.eye(s * m) - q * np.kron(C, J0))

    lu = factor(jac_at(t_left, y_left))

    G = np.zeros((s, m)) if guess is None else guess.copy()
    stage_times = t_left + rule.c * h_step
    prev_update = np.inf
    refreshes_left = 8
    Y = phi
    for it in range(1, config.max_iterations + 1):
        Y = phi + q * (tables.I_local @ G)
        F = np.asarray(problem.f(stage_times, Y), dtype=float).reshape(k, m)
        residual = Q @ F - G
        delta = lu_solve(lu, residual.ravel()).reshape(s, m)
        G = G + delta
        update = float(np.max(np.abs(delta)))
        if update <= config.newton_abs_tol + config.newton_rel_tol * (1.0 + float(np.max(np.abs(G)))):
            Y = phi + q * (tables.I_local @ G)
            return G, Y, it, update
        if (
            config.jacobian_refresh == "adaptive"
            and update > 0.5 * prev_update
            and refreshes_left > 0
        ):
            # frozen matrix is a poor contraction; re-freeze at the current iterate
            lu = factor(jac_at(float(stage_times[-1]), Y[-1]))
            refreshes_left -= 1
        prev_update = update
    raise NewtonError(
        f"Newton did not converge in {config.max_iterations} iterations "
        f"(final update {update:.3e}) on step starting at t={t_left:.6g}",
        step_kind="unknown",
        step_index=-1,
        final_update=update,
    )


def advance_step(phi_end: np.ndarray, gamma_block: np.ndarray, h_step: float, alpha: float) -> np.ndarray:
    """Endpoint value phi(1) + h^a / Gamma(a+1) * gamma_0."""
    return phi_end + h_step ** alpha / gamma(alpha + 1.0) * gamma_block[0]


def solve(
    problem: ProblemSpec,
    mesh: MixedMesh,
    rule: QuadratureRule,
    tables: FractionalTables,
    config: SolverConfig | None = None,
) -> SolutionTrajectory:
    """March the discretization across the mesh and return the trajectory.

    The step loop is sequential; each step consumes every previous block
    through the memory term, accumulated oldest to newest.
    """
    if config is None:
        config = SolverConfig()
    if not (problem.alpha == rule.alpha == tables.alpha):
        raise ValueError("problem, rule and tables must share alpha")
    if (tables.N, tables.n, tables.nu) != (mesh.N, mesh.n, mesh.nu) or tables.r != mesh.r:
        raise ValueError("tables were built for a different mesh")
    if rule.s > rule.k:
        raise ValueError("need s <= k")

    m = problem.dimension
    n_nodes = mesh.node_count
    values = np.empty((n_nodes, m))
    values[0] = problem.y0[0]
    iterations = np.zeros(mesh.n_steps, dtype=int)
    final_updates = np.zeros(mesh.n_steps)
    history = CoefficientHistory()
    stage_times = [] if config.keep_stages else None
    stages = [] if config.keep_stages else None

    prev_block = None
    for g in range(mesh.n_steps):
        desc = step_descriptor(mesh, g)
        if desc.kind == "graded":
            phi, phi_end = _memory_graded(desc.local_index, history, tables, problem, mesh, rule)
        else:
            phi, phi_end = _memory_uniform(desc.local_index, history, tables, problem, mesh, rule)
        try:
            G, Y, its, upd = solve_step(
                phi, desc.step_size, desc.left_time, values[g],
                problem, rule, tables, config, guess=prev_block,
            )
        except NewtonError as err:
            raise NewtonError(
                f"{desc.kind} step {desc.local_index} (t in "
                f"[{desc.left_time:.6g}, {desc.left_time + desc.step_size:.6g}]): {err}",
                step_kind=desc.kind,
                step_index=desc.local_index,
                final_update=err.final_update,
            ) from None
        if desc.kind == "graded":
            history.graded.append(G)
        else:
            history.uniform.append(G)
        values[g + 1] = advance_step(phi_end, G, desc.step_size, tables.alpha)
        iterations[g] = its
        final_updates[g] = upd
        if config.keep_stages:
            stage_times.append(desc.left_time + rule.c * desc.step_size)
            stages.append(Y)
        prev_block = G

    return SolutionTrajectory(
        times=mesh.times.copy(),
        values=values,
        iterations=iterations,
        final_updates=final_updates,
        history=history,
        mesh=mesh,
        problem_name=problem.name,
        stage_times=stage_times,
        stages=stages,
    )
