"""Riemann-Liouville integrals of the basis polynomials and history-weight kernels.

Two kinds of integral drive the stepping scheme:

* the local matrix with entries I^a P_{j-1}(c_i), the fractional integrals
  of the basis at the quadrature nodes, and
* the tail kernels J_j^a(x) = (1/Gamma(a)) int_0^1 (x - t)^(a-1) P_j(t) dt
  for x >= 1, which weight the contribution of a past interval at scaled
  distance x.

The local matrix is exact up to roundoff through the same-weight quadrature
identity; the tail kernels are integrated on composite Gauss-Legendre
panels geometrically graded toward t = 1, where the integrand steepens as
x approaches 1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from math import gamma
from pathlib import Path

import numpy as np

from .mesh import MixedMesh
from .quadrature import QuadratureRule, RecurrenceTable, evaluate_basis, jacobi_recurrence

__all__ = [
    "TailKernelConfig",
    "TailKernelEvaluator",
    "FractionalTables",
    "tail_kernel",
    "rl_basis_matrix",
    "rl_basis_row",
    "build_tables",
    "save_tables",
    "load_tables",
    "tables_cache_path",
]

_CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TailKernelConfig:
    """Panel scheme controls for the tail kernels."""

    panel_order: int = 30
    grading_ratio: float = 2.0
    min_panel: float = 2.0 ** -45
    rel_tol: float = 1e-14

    def __post_init__(self):
        if self.panel_order < 10:
            raise ValueError(f"panel_order must be >= 10, got {self.panel_order}")
        if self.grading_ratio <= 1.0:
            raise ValueError(f"grading_ratio must be > 1, got {self.grading_ratio}")


class TailKernelEvaluator:
    """Vectorized evaluation of J_0^a(x) .. J_{s-1}^a(x) over batches of arguments.

    Arguments are grouped by the number of panels their distance x - 1
    requires; within a group all points share one fixed node set, so the
    kernel values reduce to a single matrix product against precomputed
    weighted basis values.  Panels keep shrinking by the grading ratio until
    the panel touching t = 1 is no longer than max(x - 1, min_panel); for
    x >= 2 a single panel covers [0, 1].  At x = 1 exactly the kernel equals
    the weight up to a constant and orthonormality collapses the integral to
    delta_{j0} / Gamma(a+1), which is used directly.
    """

    def __init__(self, table: RecurrenceTable, s: int, cfg: TailKernelConfig | None = None):
        self.cfg = cfg if cfg is not None else TailKernelConfig()
        self.table = table
        self.s = s
        self.alpha = table.alpha
        self._gl_nodes, self._gl_weights = np.polynomial.legendre.leggauss(self.cfg.panel_order)
        self._groups: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _group(self, n_splits: int) -> tuple[np.ndarray, np.ndarray]:
        """Node vector and weighted basis matrix for a fixed split count."""
        cached = self._groups.get(n_splits)
        if cached is not None:
            return cached
        bounds = [0.0]
        left = 0.0
        for _ in range(n_splits):
            left = left + (1.0 - left) * (1.0 - 1.0 / self.cfg.grading_ratio)
            bounds.append(left)
        bounds.append(1.0)
        nodes = []
        weights = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= lo:
                continue
            half = 0.5 * (hi - lo)
            nodes.append(half * self._gl_nodes + 0.5 * (hi + lo))
            weights.append(half * self._gl_weights)
        t = np.concatenate(nodes)
        B = np.concatenate(weights)[:, None] * evaluate_basis(self.table, self.s, t)
        self._groups[n_splits] = (t, B)
        return t, B

    def _split_count(self, x: float) -> int:
        target = max(x - 1.0, self.cfg.min_panel)
        shrink = 1.0 - 1.0 / self.cfg.grading_ratio
        count = 0
        remaining = 1.0
        while remaining > target:
            remaining *= shrink
            count += 1
        return count

    def evaluate(self, x) -> np.ndarray:
        """Kernel values for every degree below s; shape (n, s) for n arguments."""
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xv < 1.0):
            bad = xv[xv < 1.0][0]
            raise ValueError(f"tail kernel argument must satisfy x >= 1, got {bad}")
        out = np.empty((xv.size, self.s))
        exact = xv == 1.0
        if np.any(exact):
            out[exact] = 0.0
            out[exact, 0] = 1.0 / gamma(self.alpha + 1.0)
        rest = np.nonzero(~exact)[0]
        if rest.size:
            counts = np.fromiter(
                (self._split_count(v) for v in xv[rest]), dtype=int, count=rest.size
            )
            for n_splits in np.unique(counts):
                idx = rest[counts == n_splits]
                t, B = self._group(int(n_splits))
                ker = (xv[idx, None] - t[None, :]) ** (self.alpha - 1.0)
                out[idx] = ker @ B / gamma(self.alpha)
        return out


def tail_kernel(alpha: float, iota: int, x: float, cfg: TailKernelConfig | None = None) -> float:
    """Single history-weight kernel value J_iota^a(x) for x >= 1."""
    if x < 1.0:
        raise ValueError(f"tail kernel argument must satisfy x >= 1, got {x}")
    if iota < 0:
        raise ValueError(f"degree must be >= 0, got {iota}")
    table = jacobi_recurrence(alpha, max(iota + 1, 2))
    ev = TailKernelEvaluator(table, iota + 1, cfg)
    return float(ev.evaluate(x)[0, iota])


def rl_basis_matrix(
    rule: QuadratureRule,
    table: RecurrenceTable,
    alpha: float | None = None,
    s: int | None = None,
) -> np.ndarray:
    """Matrix of fractional integrals I^a P_{j-1}(c_i), shape (k, s).

    The substitution t = c*u turns the integral into a same-weight average
    of P_j along [0, c]:

        I^a P_j(c) = c^a / Gamma(a+1) * sum_nu b_nu P_j(c * c_nu).

    The substituted integrand is a polynomial of degree j <= s-1 <= 2k-1, so
    the rule integrates it exactly and the entries are exact up to roundoff.
    """
    if alpha is None:
        alpha = rule.alpha
    if s is None:
        s = rule.s
    if table.alpha != alpha or rule.alpha != alpha:
        raise ValueError("rule, table and alpha must agree")
    if s > rule.k:
        raise ValueError(f"need s <= k, got s={s}, k={rule.k}")
    out = np.empty((rule.k, s))
    scale = rule.c ** alpha / gamma(alpha + 1.0)
    for i in range(rule.k):
        B = evaluate_basis(table, s, rule.c[i] * rule.c)
        out[i] = scale[i] * (rule.b @ B)
    return out


def rl_basis_row(rule: QuadratureRule, table: RecurrenceTable, c: float, s: int | None = None) -> np.ndarray:
    """Fractional integrals I^a P_0(c) .. I^a P_{s-1}(c) at one point c in [0, 1]."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"need c in [0, 1], got {c}")
    if s is None:
        s = rule.s
    if s > rule.k:
        raise ValueError(f"need s <= k, got s={s}, k={rule.k}")
    B = evaluate_basis(table, s, c * rule.c)
    return c ** table.alpha / gamma(table.alpha + 1.0) * (rule.b @ B)


@dataclass(frozen=True)
class FractionalTables:
    """Precomputed integral families for one (mesh, rule) combination.

    * ``I_local``   (k, s): I^a P_{j-1}(c_i), the current-interval operator;
    * ``J_uniform`` (N-n-1, k, s): kernels at d + c_rho, the uniform-history
      weights at step distance d = 1..N-n-1;
    * ``J_graded``  (nu-1, k, s): kernels at (r^d-1)/(r-1) + c_rho r^d, the
      graded-history weights at interval distance d = 1..nu-1;
    * ``J_cross``   (nu, N-n, k, s): kernels carrying graded interval
      i = 1..nu into uniform step j = n+1..N, stored at [i-1, j-1-n];
    * ``*_end`` variants: the same kernels at the step endpoint (local
      coordinate c = 1), needed to advance the solution value.

    Tables depend only on (alpha, k, s, N, n, nu, r), never on the vector
    field, so they are reusable across problems sharing these parameters.
    """

    alpha: float
    k: int
    s: int
    N: int
    n: int
    nu: int
    r: float
    I_local: np.ndarray
    J_uniform: np.ndarray
    J_graded: np.ndarray
    J_cross: np.ndarray
    J_uniform_end: np.ndarray
    J_graded_end: np.ndarray
    J_cross_end: np.ndarray


def build_tables(
    mesh: MixedMesh,
    rule: QuadratureRule,
    table: RecurrenceTable,
    cfg: TailKernelConfig | None = None,
) -> FractionalTables:
    """Precompute every integral the stepping scheme needs on the given mesh.

    Kernel arguments below 1 cannot arise from a valid mesh; the evaluator
    treats them as an internal invariant violation and raises.
    """
    alpha = rule.alpha
    if table.alpha != alpha:
        raise ValueError("rule and table must share alpha")
    k, s = rule.k, rule.s
    N, n, nu, r = mesh.N, mesh.n, mesh.nu, mesh.r
    c = rule.c

    ev = TailKernelEvaluator(table, s, cfg)
    I_local = rl_basis_matrix(rule, table, alpha, s)

    n_uni = max(N - n - 1, 0)
    if n_uni:
        d = np.arange(1, n_uni + 1, dtype=float)
        J_uniform = ev.evaluate((d[:, None] + c[None, :]).ravel()).reshape(n_uni, k, s)
        J_uniform_end = ev.evaluate(d + 1.0)
    else:
        J_uniform = np.zeros((0, k, s))
        J_uniform_end = np.zeros((0, s))

    n_gra = max(nu - 1, 0)
    if n_gra:
        d = np.arange(1, n_gra + 1, dtype=float)
        rd = r ** d
        base = (rd - 1.0) / (r - 1.0)
        args = (base[:, None] + c[None, :] * rd[:, None]).ravel()
        J_graded = ev.evaluate(args).reshape(n_gra, k, s)
        J_graded_end = ev.evaluate((r ** (d + 1.0) - 1.0) / (r - 1.0))
    else:
        J_graded = np.zeros((0, k, s))
        J_graded_end = np.zeros((0, s))

    n_cross = max(N - n, 0)
    if n_cross:
        i = np.arange(nu, dtype=float)
        j = np.arange(n, N, dtype=float)
        ri = r ** i
        scale = (r ** nu - 1.0) / (n * ri * (r - 1.0))
        offset = (ri - 1.0) / (ri * (r - 1.0))
        args = (
            (j[None, :, None] + c[None, None, :]) * scale[:, None, None]
            - offset[:, None, None]
        ).ravel()
        J_cross = ev.evaluate(args).reshape(nu, n_cross, k, s)
        args_end = ((j[None, :] + 1.0) * scale[:, None] - offset[:, None]).ravel()
        J_cross_end = ev.evaluate(args_end).reshape(nu, n_cross, s)
    else:
        J_cross = np.zeros((nu, 0, k, s))
        J_cross_end = np.zeros((nu, 0, s))

    return FractionalTables(
        alpha=alpha, k=k, s=s, N=N, n=n, nu=nu, r=r,
        I_local=I_local,
        J_uniform=J_uniform, J_graded=J_graded, J_cross=J_cross,
        J_uniform_end=J_uniform_end, J_graded_end=J_graded_end, J_cross_end=J_cross_end,
    )


def _tables_key(alpha: float, k: int, s: int, N: int, n: int, nu: int, r: float) -> str:
    blob = json.dumps(
        {"alpha": alpha, "k": k, "s": s, "N": N, "n": n, "nu": nu, "r": r},
        sort_keys=True,
    )
    return hashlib.sha1(blob.encode()).hexdigest()[:16]


def tables_cache_path(
    cache_dir, alpha: float, k: int, s: int, N: int, n: int, nu: int, r: float
) -> Path:
    return Path(cache_dir) / f"tables_{_tables_key(alpha, k, s, N, n, nu, r)}.npz"


def save_tables(tables: FractionalTables, cache_dir) -> str:
    """Write the tables to a versioned npz cache file; returns the path."""
    path = tables_cache_path(cache_dir, tables.alpha, tables.k, tables.s,
                             tables.N, tables.n, tables.nu, tables.r)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        format_version=np.array([_CACHE_FORMAT_VERSION]),
        params=np.array([tables.alpha, tables.k, tables.s, tables.N,
                         tables.n, tables.nu, tables.r]),
        I_local=tables.I_local,
        J_uniform=tables.J_uniform, J_graded=tables.J_graded, J_cross=tables.J_cross,
        J_uniform_end=tables.J_uniform_end, J_graded_end=tables.J_graded_end,
        J_cross_end=tables.J_cross_end,
    )
    return str(path)


def load_tables(
    cache_dir, alpha: float, k: int, s: int, N: int, n: int, nu: int, r: float
) -> FractionalTables | None:
    """Load cached tables for the exact parameter tuple, or None if absent."""
    path = tables_cache_path(cache_dir, alpha, k, s, N, n, nu, r)
    if not path.exists():
        return None
    with np.load(path) as data:
        if int(data["format_version"][0]) != _CACHE_FORMAT_VERSION:
            return None
        p = data["params"]
        if not (p[0] == alpha and p[1] == k and p[2] == s and p[3] == N
                and p[4] == n and p[5] == nu and p[6] == r):
            return None
        return FractionalTables(
            alpha=alpha, k=k, s=s, N=N, n=n, nu=nu, r=r,
            I_local=data["I_local"],
            J_uniform=data["J_uniform"], J_graded=data["J_graded"], J_cross=data["J_cross"],
            J_uniform_end=data["J_uniform_end"], J_graded_end=data["J_graded_end"],
            J_cross_end=data["J_cross_end"],
        )
