"""Linear stability toolkit: Butcher tableau, stability function, Mittag-Leffler.

One step of the collocation method on y^(a) = lam*y with q = lam*h^a maps
y0 to R(q)*y0 with the rational stability function

    R(q) = 1 + q / Gamma(a+1) * b^T (I - q A)^(-1) e,

a rational approximation of the one-parameter Mittag-Leffler function
E_a(q) that governs the continuous problem.  This module evaluates R, its
limit at infinity, the Mittag-Leffler function on a validated domain, and
level-set boundary data for stability-region plots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gamma, lgamma, pi

import mpmath
import numpy as np
from scipy.special import rgamma

from .fractional import rl_basis_matrix
from .quadrature import RecurrenceTable, QuadratureRule, gauss_jacobi_rule, jacobi_recurrence

__all__ = [
    "Tableau",
    "RegionData",
    "AccuracyDomainError",
    "butcher_tableau",
    "stability_value",
    "stability_at_infinity",
    "mittag_leffler",
    "region_boundary",
    "stability_sector_rays",
]


class AccuracyDomainError(ValueError):
    """Input outside the validated accuracy domain of an evaluator."""


@dataclass(frozen=True)
class Tableau:
    """Runge-Kutta data of the k = s collocation method: A = I_s^a P_s^T Omega."""

    s: int
    alpha: float
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray


def butcher_tableau(
    s: int,
    alpha: float,
    table: RecurrenceTable | None = None,
    rule: QuadratureRule | None = None,
) -> Tableau:
    """Tableau of the s-stage collocation method for fractional order alpha."""
    if table is None:
        table = jacobi_recurrence(alpha, s + 1)
    if rule is None:
        rule = gauss_jacobi_rule(table, s, s)
    if rule.k != s or rule.s != s:
        raise ValueError("tableau construction requires a rule with k = s")
    I_mat = rl_basis_matrix(rule, table, alpha, s)
    A = I_mat @ (rule.P.T * rule.b)
    return Tableau(s=s, alpha=alpha, A=A, b=rule.b.copy(), c=rule.c.copy())


def stability_value(tableau: Tableau, q: complex) -> complex:
    """R(q) through one dense solve; raises if q is a pole of R."""
    s = tableau.s
    try:
        x = np.linalg.solve(np.eye(s) - q * tableau.A, np.ones(s))
    except np.linalg.LinAlgError as exc:
        raise ZeroDivisionError(f"q = {q} is a pole of the stability function") from exc
    return 1.0 + q / gamma(tableau.alpha + 1.0) * (tableau.b @ x)


def stability_at_infinity(tableau: Tableau) -> float:
    """Limit of R along any ray to infinity: 1 - b^T A^(-1) e / Gamma(a+1)."""
    try:
        x = np.linalg.solve(tableau.A, np.ones(tableau.s))
    except np.linalg.LinAlgError as exc:
        raise ZeroDivisionError("tableau matrix A is singular") from exc
    return 1.0 - (tableau.b @ x) / gamma(tableau.alpha + 1.0)


# ---------------------------------------------------------------------------
# Mittag-Leffler function on a validated domain


_SERIES_RADIUS = 50.0
_SERIES_TERM_BOUND = 20_000
_TARGET_REL = 1e-12


def _series_double(alpha: float, beta: float, z: complex):
    """Kahan-compensated Taylor sum; returns (sum, max|term|, n_terms) or None at term bound."""
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    term = complex(rgamma(beta))
    max_term = abs(term)
    j = 0
    while j < _SERIES_TERM_BOUND:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        ratio = z * math.exp(lgamma(alpha * j + beta) - lgamma(alpha * (j + 1) + beta))
        term = term * ratio
        j += 1
        mag = abs(term)
        max_term = max(max_term, mag)
        if mag <= 1e-18 * (abs(total) + 1e-300) and alpha * j + beta > abs(z) ** (1.0 / alpha):
            return total, max_term, j
    return None


def _series_mpmath(alpha: float, beta: float, z: complex, max_term: float) -> complex:
    """Re-sum the series with enough digits to absorb the cancellation."""
    dps = 25 + max(0, int(math.ceil(math.log10(max(max_term, 1.0)))))
    for _ in range(3):
        with mpmath.workdps(dps):
            za = mpmath.mpc(z)
            total = mpmath.mpc(0)
            term = 1 / mpmath.gamma(beta)
            j = 0
            while j < _SERIES_TERM_BOUND:
                total += term
                term *= za * mpmath.gamma(alpha * j + beta) / mpmath.gamma(alpha * (j + 1) + beta)
                j += 1
                if abs(term) <= mpmath.mpf(10) ** (-dps) * (abs(total) + mpmath.mpf(10) ** -dps) \
                        and alpha * j + beta > abs(z) ** (1.0 / alpha):
                    break
            result = complex(total)
        if max_term * 10.0 ** (-dps) <= _TARGET_REL * max(abs(result), 1e-300):
            return result
        dps += 15
    raise AccuracyDomainError(
        f"series for E_({alpha},{beta}) at z={z} did not reach the accuracy target"
    )


def _asymptotic(alpha: float, beta: float, z: complex) -> complex:
    """Inverse-power expansion -sum_k z^(-k)/Gamma(beta - alpha*k), truncated at the smallest term.

    Valid deep inside the sector |arg z| > alpha*pi/2; the omitted
    exponential contribution is bounded and the call is rejected when that
    bound or the truncation error exceeds the accuracy target.
    """
    if alpha > 1.0:
        raise AccuracyDomainError("asymptotic path is validated for alpha <= 1 only")
    zinv = 1.0 / z
    total = 0.0 + 0.0j
    term = -zinv * rgamma(beta - alpha)
    smallest = abs(term)
    k = 1
    while k < 200:
        total += term
        k += 1
        term = -zinv ** k * rgamma(beta - alpha * k)
        mag = abs(term)
        if mag >= smallest and k > 2:
            break
        smallest = min(smallest, mag) if mag > 0 else smallest
    truncation = abs(term)
    # the exponential branch (1/a) z^((1-b)/a) exp(z^(1/a)) only exists for
    # |arg z| <= a*pi; beyond that line the inverse-power sum is complete
    theta = abs(math.atan2(z.imag, z.real))
    if theta <= alpha * pi / 2:
        exp_bound = math.inf  # outside the decay sector entirely
    elif theta > alpha * pi:
        exp_bound = 0.0
    else:
        re_root = abs(z) ** (1.0 / alpha) * math.cos(theta / alpha)
        exp_bound = math.inf if re_root > 700 else \
            abs(z) ** ((1.0 - beta) / alpha) * math.exp(re_root) / alpha
    scale = max(abs(total), 1e-300)
    if truncation > 1e-11 * scale or exp_bound > 1e-11 * scale:
        raise AccuracyDomainError(
            f"asymptotic expansion for E_({alpha},{beta}) at z={z} cannot reach the accuracy target"
        )
    return total


def mittag_leffler(alpha: float, z, beta: float = 1.0) -> complex:
    """Two-parameter Mittag-Leffler value E_(alpha,beta)(z) to ~1e-11 relative.

    Validated domain: |z| <= 50 by Taylor series (double precision with
    compensated summation, escalated to extended precision when the
    cancellation estimate exceeds the target, with a hard term-count
    bound), and |z| > 50 with alpha <= 1 by the inverse-power asymptotic
    expansion inside the sector |arg z| > alpha*pi/2.  Inputs outside the
    validated domain raise AccuracyDomainError instead of degrading.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"alpha and beta must be positive, got alpha={alpha}, beta={beta}")
    zc = complex(z)
    if abs(zc) <= _SERIES_RADIUS:
        attempt = _series_double(alpha, beta, zc)
        if attempt is None:
            raise AccuracyDomainError(
                f"series for E_({alpha},{beta}) at z={zc} exceeded {_SERIES_TERM_BOUND} terms"
            )
        total, max_term, n_terms = attempt
        if max_term * n_terms * np.finfo(float).eps <= _TARGET_REL * max(abs(total), 1e-300):
            return total
        return _series_mpmath(alpha, beta, zc, max_term)
    return _asymptotic(alpha, beta, zc)


def _ml_grid(alpha: float, Z: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Vectorized E_alpha over a complex grid; NaN where the target accuracy is unreachable.

    Double-precision series inside |z| <= 50 with a per-point cancellation
    estimate, asymptotic expansion outside; no extended-precision rescue, so
    a band of the plane may come back as gaps.
    """
    out = np.full(Z.shape, np.nan + 1j * np.nan, dtype=complex)
    flat = Z.ravel()
    absz = np.abs(flat)

    series = absz <= _SERIES_RADIUS
    if np.any(series):
        zs = flat[series]
        total = np.zeros(zs.shape, dtype=complex)
        comp = np.zeros_like(total)
        term = np.ones(zs.shape, dtype=complex)
        max_term = np.abs(term).copy()
        active = np.ones(zs.shape, dtype=bool)
        converged = np.zeros(zs.shape, dtype=bool)
        root = absz[series] ** (1.0 / alpha)
        j = 0
        while np.any(active) and j < 4000:
            y = np.where(active, term, 0.0) - comp
            t = total + y
            comp = (t - total) - y
            total = t
            ratio = math.exp(lgamma(alpha * j + 1.0) - lgamma(alpha * (j + 1) + 1.0))
            term = term * (zs * ratio)
            j += 1
            mag = np.abs(term)
            np.maximum(max_term, mag, out=max_term)
            done = active & (mag <= 1e-17 * (np.abs(total) + 1e-300)) & (alpha * j + 1.0 > root)
            converged |= done
            active &= ~done
        ok = converged & (max_term * j * np.finfo(float).eps <= tol * np.maximum(np.abs(total), 1e-300))
        vals = np.where(ok, total, np.nan + 1j * np.nan)
        tmp = out.ravel()
        tmp[np.nonzero(series)[0]] = vals
        out = tmp.reshape(Z.shape)

    tail = ~series
    if np.any(tail) and alpha <= 1.0:
        zt = flat[tail]
        vals = np.full(zt.shape, np.nan + 1j * np.nan, dtype=complex)
        total = np.zeros(zt.shape, dtype=complex)
        smallest = np.full(zt.shape, np.inf)
        term = -rgamma(1.0 - alpha) / zt
        live = np.ones(zt.shape, dtype=bool)
        k = 1
        while np.any(live) and k < 200:
            total = np.where(live, total + term, total)
            k += 1
            term = -zt ** (-float(k)) * rgamma(1.0 - alpha * k)
            mag = np.abs(term)
            stop = live & (mag >= smallest) & (k > 2)
            live &= ~stop
            smallest = np.minimum(smallest, np.where(mag > 0, mag, smallest))
        theta = np.abs(np.angle(zt))
        re_root = np.abs(zt) ** (1.0 / alpha) * np.cos(theta / alpha)
        exp_bound = np.where(
            theta <= alpha * pi / 2, np.inf,
            np.where(theta > alpha * pi, 0.0, np.exp(np.minimum(re_root, 700.0)) / alpha),
        )
        scale = np.maximum(np.abs(total), 1e-300)
        ok = (~live) & (np.abs(term) <= tol * scale) & (exp_bound <= tol * scale)
        vals = np.where(ok, total, np.nan + 1j * np.nan)
        tmp = out.ravel()
        tmp[np.nonzero(tail)[0]] = vals
        out = tmp.reshape(Z.shape)
    return out


# ---------------------------------------------------------------------------
# Stability-region boundary data


@dataclass
class RegionData:
    """Grid samples of |R| (and |E_alpha| where computable) plus level-1 boundary segments."""

    s: int
    alpha: float
    re: np.ndarray
    im: np.ndarray
    abs_R: np.ndarray
    abs_E: np.ndarray
    r_level: np.ndarray   # (n, 2, 2) segments of |R| = 1
    e_level: np.ndarray   # (n, 2, 2) segments of |E| = 1
    rays: np.ndarray      # (2, n_pts, 2) boundary rays of the stability sector


def _marching_squares(xs: np.ndarray, ys: np.ndarray, Z: np.ndarray, level: float) -> np.ndarray:
    """Level-set segments of Z (shape (len(ys), len(xs))) by linear interpolation.

    Cells containing non-finite samples are skipped, so poles and accuracy
    gaps become holes in the curve rather than errors.
    """
    segs = []

    def interp(va, vb, pa, pb):
        t = 0.5 if vb == va else (level - va) / (vb - va)
        return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))

    for row in range(len(ys) - 1):
        for col in range(len(xs) - 1):
            v = (Z[row, col], Z[row, col + 1], Z[row + 1, col + 1], Z[row + 1, col])
            if not all(np.isfinite(v)):
                continue
            corners = (
                (xs[col], ys[row]),
                (xs[col + 1], ys[row]),
                (xs[col + 1], ys[row + 1]),
                (xs[col], ys[row + 1]),
            )
            idx = sum(1 << i for i in range(4) if v[i] > level)
            if idx in (0, 15):
                continue
            # edge order: 0 bottom, 1 right, 2 top, 3 left
            edges = {
                0: interp(v[0], v[1], corners[0], corners[1]),
                1: interp(v[1], v[2], corners[1], corners[2]),
                2: interp(v[3], v[2], corners[3], corners[2]),
                3: interp(v[0], v[3], corners[0], corners[3]),
            }
            table = {
                1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
                6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(0, 2)],
                11: [(1, 2)], 12: [(3, 1)], 13: [(0, 1)], 14: [(3, 0)],
            }
            if idx in (5, 10):
                # saddle cell: resolve the pairing by the center average
                center_above = 0.25 * sum(v) > level
                if idx == 5:
                    pairs = [(0, 1), (2, 3)] if center_above else [(0, 3), (1, 2)]
                else:
                    pairs = [(0, 3), (1, 2)] if center_above else [(0, 1), (2, 3)]
            else:
                pairs = table[idx]
            for ea, eb in pairs:
                segs.append((edges[ea], edges[eb]))
    if not segs:
        return np.zeros((0, 2, 2))
    return np.asarray(segs)


def stability_sector_rays(alpha: float, radius: float, n_pts: int = 200) -> np.ndarray:
    """The two boundary rays arg(q) = +/- alpha*pi/2 out to the given radius."""
    t = np.linspace(0.0, radius, n_pts)
    upper = np.column_stack([t * math.cos(alpha * pi / 2), t * math.sin(alpha * pi / 2)])
    lower = np.column_stack([t * math.cos(alpha * pi / 2), -t * math.sin(alpha * pi / 2)])
    return np.stack([upper, lower])


def region_boundary(
    s: int,
    alpha: float,
    window: tuple[float, float, float, float] = (-15.0, 5.0, -10.0, 10.0),
    grid_shape: tuple[int, int] = (800, 800),
    include_ml: bool = True,
    ml_tol: float = 1e-8,
) -> RegionData:
    """Sample |R| (and |E_alpha| where computable) on a rectangular grid and extract |.| = 1.

    R is evaluated over the whole grid at once through the eigenvalue
    partial-fraction form of the resolvent; grid poles come back as
    non-finite samples and turn into curve gaps, not errors.
    """
    re0, re1, im0, im1 = window
    nx, ny = grid_shape
    xs = np.linspace(re0, re1, nx)
    ys = np.linspace(im0, im1, ny)
    Q = xs[None, :] + 1j * ys[:, None]

    tab = butcher_tableau(s, alpha)
    lam, V = np.linalg.eig(tab.A)
    w = (tab.b @ V) * np.linalg.solve(V, np.ones(s))
    with np.errstate(divide="ignore", invalid="ignore"):
        resolvent = np.zeros(Q.shape, dtype=complex)
        for wi, li in zip(w, lam):
            resolvent += wi / (1.0 - Q * li)
        Rgrid = 1.0 + Q / gamma(alpha + 1.0) * resolvent
    abs_R = np.abs(Rgrid)

    if include_ml:
        abs_E = np.abs(_ml_grid(alpha, Q, tol=ml_tol))
    else:
        abs_E = np.full(Q.shape, np.nan)

    radius = max(abs(re0), abs(re1), abs(im0), abs(im1))
    return RegionData(
        s=s,
        alpha=alpha,
        re=xs,
        im=ys,
        abs_R=abs_R,
        abs_E=abs_E,
        r_level=_marching_squares(xs, ys, abs_R, 1.0),
        e_level=_marching_squares(xs, ys, abs_E, 1.0),
        rays=stability_sector_rays(alpha, radius),
    )


def write_region_csv(region: RegionData, grid_path, boundary_path) -> None:
    """Emit the grid samples and the level-set / ray data as two CSV files."""
    nx, ny = region.re.size, region.im.size
    RE, IM = np.meshgrid(region.re, region.im)
    grid = np.column_stack([RE.ravel(), IM.ravel(), region.abs_R.ravel(), region.abs_E.ravel()])
    np.savetxt(grid_path, grid, delimiter=",", comments="",
               header="re_q,im_q,abs_R,abs_E", fmt="%.17g")

    rows = []
    for name, segs in (("R_level1", region.r_level), ("E_level1", region.e_level)):
        for i, seg in enumerate(segs):
            rows.append((name, i, seg[0][0], seg[0][1], seg[1][0], seg[1][1]))
    for name, ray in zip(("ray_plus", "ray_minus"), region.rays):
        for i in range(len(ray) - 1):
            rows.append((name, i, ray[i, 0], ray[i, 1], ray[i + 1, 0], ray[i + 1, 1]))
    with open(boundary_path, "w") as fh:
        fh.write("curve,segment,x0,y0,x1,y1\n")
        for name, i, x0, y0, x1, y1 in rows:
            fh.write(f"{name},{i},{x0:.17g},{y0:.17g},{x1:.17g},{y1:.17g}\n")
