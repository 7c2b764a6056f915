"""Shared oracle helpers and the acceptance-criterion summary hook."""

from __future__ import annotations

from math import gamma

import numpy as np
import pytest
from scipy.integrate import quad

from fdeint import evaluate_basis

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((number, name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


# --- brute-force integral oracles -------------------------------------------


def weighted_inner_product(table, i: int, j: int) -> float:
    """Adaptive quadrature of the weighted product integral of P_i and P_j."""
    deg = max(i, j) + 1
    val, _ = quad(
        lambda c: table.alpha * evaluate_basis(table, deg, c)[i] * evaluate_basis(table, deg, c)[j],
        0.0, 1.0, weight="alg", wvar=(0.0, table.alpha - 1.0), limit=400,
    )
    return val


def weighted_integral(table, func) -> float:
    """Adaptive quadrature of the weight times an arbitrary smooth function."""
    val, _ = quad(
        lambda c: table.alpha * func(c),
        0.0, 1.0, weight="alg", wvar=(0.0, table.alpha - 1.0), limit=400,
    )
    return val


def rl_integral_oracle(table, j: int, c: float) -> float:
    """Brute-force fractional integral of P_j at c, endpoint singularity handled by QUADPACK."""
    alpha = table.alpha
    val, _ = quad(
        lambda t: evaluate_basis(table, j + 1, t)[j],
        0.0, c, weight="alg", wvar=(0.0, alpha - 1.0), limit=400,
    )
    return val / gamma(alpha)


def tail_kernel_oracle(table, iota: int, x: float) -> float:
    """Brute-force tail kernel, with breakpoints graded toward the steep end for x near 1."""
    alpha = table.alpha
    points = None
    if x - 1.0 < 1.0:
        pts = 1.0 - (x - 1.0) * 2.0 ** np.arange(0, 40)
        points = sorted(p for p in pts if 0.0 < p < 1.0)
    val, _ = quad(
        lambda t: (x - t) ** (alpha - 1.0) * evaluate_basis(table, iota + 1, t)[iota],
        0.0, 1.0, points=points, limit=500, epsabs=1e-15, epsrel=1e-13,
    )
    return val / gamma(alpha)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
