"""Registry of benchmark problems and the JSON problem-file loader.

The four built-in problems cover a smooth scalar equation with a known
solution, a stiff oscillatory linear system, a fractional Van der Pol
oscillator, and a fractional Brusselator.  User problems load from JSON
files carrying either a built-in name or a generalized power-term field
description (products of real powers of t and the state components), which
is expressive enough for every built-in problem.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gamma
from pathlib import Path

import numpy as np

from .solver import ProblemSpec

__all__ = ["BenchProblem", "PROBLEMS", "get_problem", "load_problem_file"]


@dataclass
class BenchProblem:
    """A registered problem: spec, default horizon, reference strategy, WPD grid."""

    name: str
    spec: ProblemSpec
    T_default: float
    exact: object | None = None          # exact(t) -> (len(t), m), when known
    reference: str = "fine:2"            # used when no exact solution exists
    wpd_rows: list = field(default_factory=list)


def _signed_power(y, p: float):
    """Odd extension sign(y)*|y|^p, smooth continuation for transient negative iterates."""
    return np.sign(y) * np.abs(y) ** p


# --- Problem 1: smooth scalar field, known nonsmooth solution ---------------

_P1_ALPHA = 0.3


def _p1_forcing(t):
    a = _P1_ALPHA
    t = np.asarray(t, dtype=float)
    return (
        gamma(9.0) / gamma(9.0 - a) * t ** (8.0 - a)
        - 3.0 * gamma(5.0 + a / 2.0) / gamma(5.0 - a / 2.0) * t ** (4.0 - a / 2.0)
        + (1.5 * t ** (a / 2.0) - t ** 4.0) ** 3
        + 2.25 * gamma(a + 1.0)
    )


def _p1_f(t, y):
    y = np.asarray(y, dtype=float)
    out = -_signed_power(y[..., 0], 1.5) + _p1_forcing(t)
    return out[..., None]


def _p1_jac(t, y):
    return np.array([[-1.5 * np.sqrt(abs(float(y[0])))]])


def _p1_exact(t):
    a = _P1_ALPHA
    t = np.asarray(t, dtype=float)
    return (t ** 8 - 3.0 * t ** (4.0 + a / 2.0) + 2.25 * t ** a)[:, None]


# --- Problem 2: stiff oscillatory linear system ------------------------------

_P2_MATRIX = np.array(
    [
        [41, 41, -38, 40, -2],
        [-79, 81, 2, 0, -2],
        [20, -60, 20, -20, -8],
        [-22, 58, -24, 20, -4],
        [1, 1, -2, -4, -2],
    ],
    dtype=float,
) / 8.0

# eigenvalues 10 +/- 10i and 1/2 +/- i/2 sit on the sector boundary, -1 inside it
_P2_EIGENVALUES = np.array([10 + 10j, 10 - 10j, 0.5 + 0.5j, 0.5 - 0.5j, -1.0 + 0j])


def _p2_f(t, y):
    return np.asarray(y, dtype=float) @ _P2_MATRIX.T


def _p2_jac(t, y):
    return _P2_MATRIX


# --- Problem 3: fractional Van der Pol ---------------------------------------


def _p3_f(t, y):
    y = np.asarray(y, dtype=float)
    y1, y2 = y[..., 0], y[..., 1]
    return np.stack([y2, -y1 - 10.0 * y2 * (y1 ** 2 - 1.0)], axis=-1)


def _p3_jac(t, y):
    y1, y2 = float(y[0]), float(y[1])
    return np.array([[0.0, 1.0], [-1.0 - 20.0 * y1 * y2, -10.0 * (y1 ** 2 - 1.0)]])


# --- Problem 4: fractional Brusselator ----------------------------------------


def _p4_f(t, y):
    y = np.asarray(y, dtype=float)
    y1, y2 = y[..., 0], y[..., 1]
    return np.stack([1.0 - 4.0 * y1 + y1 ** 2 * y2, 3.0 * y1 - y1 ** 2 * y2], axis=-1)


def _p4_jac(t, y):
    y1, y2 = float(y[0]), float(y[1])
    return np.array([[-4.0 + 2.0 * y1 * y2, y1 ** 2], [3.0 - 2.0 * y1 * y2, -(y1 ** 2)]])


PROBLEMS: dict[str, BenchProblem] = {
    "problem1": BenchProblem(
        name="problem1",
        spec=ProblemSpec(alpha=_P1_ALPHA, dimension=1, f=_p1_f, jacobian=_p1_jac,
                         y0=np.array([[0.0]]), name="problem1"),
        T_default=1.0,
        exact=_p1_exact,
        reference="exact",
        wpd_rows=[{"N": N, "n": 1, "nu": 1} for N in (2, 3, 4, 5)],
    ),
    "problem2": BenchProblem(
        name="problem2",
        spec=ProblemSpec(alpha=0.5, dimension=5, f=_p2_f, jacobian=_p2_jac,
                         y0=np.array([[1.0, 2.0, 3.0, 4.0, 5.0]]), name="problem2"),
        T_default=20.0,
        reference="fine:2",
        wpd_rows=[{"N": 50 * ell, "n": 1, "nu": 20} for ell in range(4, 13)],
    ),
    "problem3": BenchProblem(
        name="problem3",
        spec=ProblemSpec(alpha=0.9, dimension=2, f=_p3_f, jacobian=_p3_jac,
                         y0=np.array([[0.0, -2.0]]), name="problem3"),
        T_default=30.0,
        reference="fine:2",
        wpd_rows=[{"N": 50 * ell, "n": 2, "nu": 50} for ell in range(4, 9)],
    ),
    "problem4": BenchProblem(
        name="problem4",
        spec=ProblemSpec(alpha=0.7, dimension=2, f=_p4_f, jacobian=_p4_jac,
                         y0=np.array([[1.2, 2.8]]), name="problem4"),
        T_default=100.0,
        reference="fine:2",
        wpd_rows=[{"N": 10 * ell, "n": 1, "nu": 20} for ell in range(1, 11)],
    ),
}


def get_problem(name: str) -> BenchProblem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; registered: {', '.join(sorted(PROBLEMS))}"
        ) from None


def _terms_field(terms, dimension: int):
    """Vector field from power-product terms.

    Each component holds a list of terms {coef, t_power, y_powers}; a term
    contributes coef * t^t_power * prod_i pow(y_i, p_i), with non-integer
    powers extended oddly through sign(y)|y|^p.
    """
    parsed = []
    for comp_terms in terms:
        comp = []
        for term in comp_terms:
            coef = float(term["coef"])
            t_pow = float(term.get("t_power", 0.0))
            y_pows = [float(p) for p in term.get("y_powers", [0.0] * dimension)]
            if len(y_pows) != dimension:
                raise ValueError("y_powers length must equal the problem dimension")
            comp.append((coef, t_pow, y_pows))
        parsed.append(comp)

    def state_power(y, p):
        if p == 0.0:
            return np.ones_like(y)
        if p == int(p) and p > 0:
            return y ** int(p)
        return _signed_power(y, p)

    def f(t, y):
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        out = np.zeros(y.shape)
        for comp, comp_terms in enumerate(parsed):
            acc = np.zeros(y.shape[:-1])
            for coef, t_pow, y_pows in comp_terms:
                val = coef * (t ** t_pow if t_pow != 0.0 else np.ones_like(t))
                for i, p in enumerate(y_pows):
                    if p != 0.0:
                        val = val * state_power(y[..., i], p)
                acc = acc + val
            out[..., comp] = acc
        return out

    def jac(t, y):
        y = np.asarray(y, dtype=float)
        J = np.zeros((dimension, dimension))
        for comp, comp_terms in enumerate(parsed):
            for coef, t_pow, y_pows in comp_terms:
                base = coef * (float(t) ** t_pow if t_pow != 0.0 else 1.0)
                for col in range(dimension):
                    p = y_pows[col]
                    if p == 0.0:
                        continue
                    d = base * p * np.abs(y[col]) ** (p - 1.0)
                    for i, pi in enumerate(y_pows):
                        if i != col and pi != 0.0:
                            d *= float(state_power(np.asarray(y[i]), pi))
                    J[comp, col] += d
        return J

    return f, jac


def load_problem_file(path) -> BenchProblem:
    """Load a problem description from JSON.

    Either {"builtin": "<name>"} (optionally overriding T), or a field
    description: {"name", "alpha", "y0": [[...]], "terms": [[...]], "T"}.
    """
    data = json.loads(Path(path).read_text())
    if "builtin" in data:
        base = get_problem(data["builtin"])
        if "T" in data:
            base = BenchProblem(name=base.name, spec=base.spec, T_default=float(data["T"]),
                                exact=base.exact, reference=base.reference,
                                wpd_rows=base.wpd_rows)
        return base
    name = data.get("name", Path(path).stem)
    alpha = float(data["alpha"])
    y0 = np.asarray(data["y0"], dtype=float)
    dimension = y0.shape[-1]
    f, jac = _terms_field(data["terms"], dimension)
    spec = ProblemSpec(alpha=alpha, dimension=dimension, f=f, jacobian=jac, y0=y0, name=name)
    return BenchProblem(name=name, spec=spec, T_default=float(data.get("T", 1.0)))
