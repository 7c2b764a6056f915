"""Orthonormal polynomial basis and Gauss quadrature for the weight a*(1-c)^(a-1) on [0,1].

The weight has unit total mass for every order a in (0,1), so the first
orthonormal polynomial is identically 1 and the Gauss weights of any rule
sum to 1.  Recurrence coefficients come from the closed-form Jacobi
recurrence with exponents (a-1, 0), affinely mapped from [-1,1] to [0,1];
nodes and weights are obtained from the symmetric tridiagonal eigenproblem
(Golub-Welsch).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "RecurrenceTable",
    "QuadratureRule",
    "jacobi_recurrence",
    "evaluate_basis",
    "gauss_jacobi_rule",
]


@dataclass(frozen=True)
class RecurrenceTable:
    """Three-term recurrence coefficients of the orthonormal basis.

    ``a[j]`` are the shift coefficients and ``b[j]`` the squared norm
    ratios, ``j = 0..max_degree``, with ``b[0] = 1`` (total mass of the
    weight).  The orthonormal recurrence reads

        sqrt(b[j+1]) P_{j+1}(c) = (c - a[j]) P_j(c) - sqrt(b[j]) P_{j-1}(c),

    with P_0 = 1 and P_{-1} = 0.
    """

    alpha: float
    max_degree: int
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule with k nodes for the weight, plus basis values at the nodes.

    ``P`` has shape (k, s) with entries P_{j-1}(c_i); columns span the first
    s basis polynomials.  Nodes are ascending and strictly inside (0, 1),
    weights are positive and sum to 1.
    """

    alpha: float
    k: int
    s: int
    c: np.ndarray
    b: np.ndarray
    P: np.ndarray


def jacobi_recurrence(alpha: float, max_degree: int) -> RecurrenceTable:
    """Recurrence coefficients of the polynomials orthonormal under a*(1-c)^(a-1).

    Closed-form Jacobi coefficients with exponents (alpha-1, 0) on [-1,1],
    mapped to [0,1]: shifts become (x+1)/2 and norm ratios are divided by 4.
    The normalization to unit mass only fixes b[0] = 1.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if max_degree < 1:
        raise ValueError(f"max_degree must be >= 1, got {max_degree}")

    pa = alpha - 1.0  # Jacobi exponent at the right endpoint after mapping
    a = np.empty(max_degree + 1)
    b = np.empty(max_degree + 1)
    a[0] = ((0.0 - pa) / (pa + 2.0) + 1.0) / 2.0
    b[0] = 1.0
    for k in range(1, max_degree + 1):
        den = (2.0 * k + pa) * (2.0 * k + pa + 2.0)
        a[k] = (-pa * pa / den + 1.0) / 2.0
        if k == 1:
            b[1] = alpha / ((pa + 2.0) ** 2 * (pa + 3.0))
        else:
            b[k] = (
                k * k * (k + pa) ** 2
                / ((2.0 * k + pa) ** 2 * (2.0 * k + pa + 1.0) * (2.0 * k + pa - 1.0))
            )
    return RecurrenceTable(alpha=alpha, max_degree=max_degree, a=a, b=b)


def evaluate_basis(table: RecurrenceTable, s: int, c) -> np.ndarray:
    """Evaluate P_0(c), ..., P_{s-1}(c) by the forward orthonormal recurrence.

    Returns shape (s,) for scalar ``c`` and (n, s) for an array of n points.
    """
    if s < 1 or s > table.max_degree + 1:
        raise ValueError(f"need 1 <= s <= max_degree+1 = {table.max_degree + 1}, got {s}")
    scalar = np.isscalar(c) or np.ndim(c) == 0
    cv = np.atleast_1d(np.asarray(c, dtype=float))
    P = np.empty((cv.size, s))
    P[:, 0] = 1.0
    if s > 1:
        sq = np.sqrt(table.b)
        P[:, 1] = (cv - table.a[0]) / sq[1]
        for j in range(1, s - 1):
            P[:, j + 1] = ((cv - table.a[j]) * P[:, j] - sq[j] * P[:, j - 1]) / sq[j + 1]
    return P[0] if scalar else P


def gauss_jacobi_rule(table: RecurrenceTable, k: int, s: int) -> QuadratureRule:
    """Build the k-point Gauss rule for the weight and tabulate the first s basis polynomials.

    Nodes are the zeros of P_k, computed as eigenvalues of the symmetric
    tridiagonal Jacobi matrix; weights are the squared first components of
    the normalized eigenvectors (total mass 1).
    """
    if not 1 <= s <= k:
        raise ValueError(f"need 1 <= s <= k, got s={s}, k={k}")
    if k > table.max_degree:
        raise ValueError(f"k={k} exceeds table max_degree={table.max_degree}")
    try:
        nodes, vecs = eigh_tridiagonal(table.a[:k], np.sqrt(table.b[1:k]))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defective input only
        raise RuntimeError("Gauss rule eigen-solve failed; recurrence table is defective") from exc
    weights = vecs[0] ** 2
    P = evaluate_basis(table, s, nodes)
    return QuadratureRule(alpha=table.alpha, k=k, s=s, c=nodes, b=weights, P=P)
