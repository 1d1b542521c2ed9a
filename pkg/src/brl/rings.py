"""Symmetric ring configurations: circulant spectra, scans, thresholds.

A ring is ``k`` points equally spaced on a planar circle of radius ``r``
inside the annulus.  Its interaction matrix is circulant, so the full
spectrum is available in closed form from the first row:

    Lambda_l = sum_j a_j cos(2 pi j (l - 1) / k),   l = 1..k,

with ``a_0`` the Robin value at radius ``r`` and ``a_j`` minus the Green
function between ring neighbors ``j`` steps apart.  Since every ``a_j``
with ``j >= 1`` is negative, ``Lambda_1`` (the plain row sum) is always
the smallest eigenvalue and its eigenvector is constant.

The module scans ``Lambda_1`` over ``r``, refines the minimizer, bisects
the inner radius for the positivity threshold, and checks the
closed-form sufficient conditions for ``k = 2`` and ``k = 4``.  For
``k = 4`` the perpendicular neighbor pair is handled in two conventions:
the full series, and a shortcut that keeps only the singular factor at
perpendicular pairs (equivalent to assuming every zonal term vanishes
there, which fails in even orders).  The gap between the two is exposed
as a structured diagnostic instead of being silently resolved.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .annulus import AnnulusGeometry, AnnulusOracle, SeriesControl
from .constants import OMEGA
from .errors import DomainError, ScanError, SymmetryError
from .interaction import Configuration

__all__ = [
    "RingConfig",
    "CirculantCoeffs",
    "RingScan",
    "ThresholdResult",
    "PerpDiagnostic",
    "circulant_coeffs",
    "circulant_eigs",
    "lambda1_ring",
    "lambda1_ring_shortcut",
    "perp_shortcut_gap",
    "discrepancy_report",
    "min_over_r",
    "threshold_rho",
    "sufficient_condition_check",
    "sufficient_rho_interval",
    "lower_bound_report",
    "dense_radius_grid",
]

# Distance kept from each boundary sphere when building radius grids.
_GRID_MARGIN = 1e-3
# Singular-part constants of the closed-form lower bound, by ring size.
_BOUND_CONST = {2: 1.0, 4: 5.0}


@dataclass(frozen=True)
class RingConfig:
    """``k`` equally spaced points on a planar circle of radius ``r``."""

    k: int
    r: float

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 2):
            raise DomainError(f"ring size must be an int >= 2, got {self.k!r}")
        if not (isinstance(self.r, (int, float)) and 0.0 < self.r < 1.0
                and math.isfinite(self.r)):
            raise DomainError(f"ring radius must lie in (0, 1), got {self.r!r}")
        object.__setattr__(self, "r", float(self.r))

    def points(self) -> np.ndarray:
        angles = 2.0 * math.pi * np.arange(self.k) / self.k
        pts = np.zeros((self.k, 4))
        pts[:, 0] = self.r * np.cos(angles)
        pts[:, 1] = self.r * np.sin(angles)
        return pts

    def validate(self, geom: AnnulusGeometry) -> None:
        if not geom.rho_in < self.r < 1.0:
            raise DomainError(
                f"ring radius {self.r:.6g} outside annulus ({geom.rho_in}, 1)"
            )

    def to_configuration(self, geom: AnnulusGeometry) -> Configuration:
        """Configuration with the largest separation scale the ring allows."""
        self.validate(geom)
        chord = 2.0 * self.r * math.sin(math.pi / self.k)
        wall = min(self.r - geom.rho_in, 1.0 - self.r)
        sep = 0.499 * min(chord, wall)
        return Configuration(self.points(), sep)


@dataclass(frozen=True)
class CirculantCoeffs:
    """First row of a ring's interaction matrix plus accuracy data."""

    values: np.ndarray
    worst_tail: float
    degraded: bool


def circulant_coeffs(ring: RingConfig, geom: AnnulusGeometry,
                     ctrl: SeriesControl | None = None,
                     oracle: AnnulusOracle | None = None) -> CirculantCoeffs:
    """Coefficients ``a_0..a_{k-1}`` of the ring's circulant matrix."""
    ring.validate(geom)
    if oracle is None:
        oracle = AnnulusOracle(geom, ctrl)
    elif ctrl is not None and oracle.control is not ctrl:
        oracle = oracle.with_control(ctrl)
    pts = ring.points()
    vals = np.zeros(ring.k)
    rr = oracle.robin_radial(ring.r)
    vals[0] = rr.value
    worst = rr.tail_bound
    degraded = rr.degraded
    for j in range(1, ring.k):
        g = oracle.green(pts[0], pts[j])
        vals[j] = -g.value
        worst = max(worst, g.tail_bound)
        degraded = degraded or g.degraded
    return CirculantCoeffs(vals, worst, degraded)


def circulant_eigs(coeffs) -> np.ndarray:
    """Closed-form spectrum of a symmetric circulant from its first row.

    Entry ``l`` of the result is the cosine sum with frequency ``l``
    (so entry 0 is the plain row sum, the smallest eigenvalue when the
    off-diagonal entries are negative).  Raises
    :class:`SymmetryError` when the row lacks reflection symmetry or
    the Fourier sums keep an imaginary residue.
    """
    a = np.asarray(coeffs.values if isinstance(coeffs, CirculantCoeffs) else coeffs,
                   dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise DomainError(f"need a first row of length >= 2, got shape {a.shape}")
    k = a.size
    scale = max(float(np.abs(a).max()), 1e-300)
    refl = float(np.abs(a[1:] - a[1:][::-1]).max(initial=0.0))
    if refl > 1e-12 * scale:
        raise SymmetryError(
            f"first row is not reflection-symmetric (defect {refl:.3g})"
        )
    j = np.arange(k)
    out = np.empty(k)
    for ell in range(k):
        ang = 2.0 * math.pi * j * ell / k
        out[ell] = float(np.dot(a, np.cos(ang)))
        imag = float(np.dot(a, np.sin(ang)))
        if abs(imag) > 1e-12 * scale * k:
            raise SymmetryError(
                f"imaginary residue {imag:.3g} in Fourier sum {ell}"
            )
    return out


def lambda1_ring(ring: RingConfig, geom: AnnulusGeometry,
                 ctrl: SeriesControl | None = None,
                 oracle: AnnulusOracle | None = None) -> float:
    """Smallest interaction eigenvalue of a ring: the coefficient sum."""
    coeffs = circulant_coeffs(ring, geom, ctrl, oracle)
    return float(coeffs.values.sum())


def lambda1_ring_shortcut(ring: RingConfig, geom: AnnulusGeometry,
                          ctrl: SeriesControl | None = None,
                          oracle: AnnulusOracle | None = None) -> float:
    """k=4 variant keeping only the singular factor at perpendicular pairs.

    Reproduces the convention in which all zonal contributions are
    assumed to vanish at right-angle pairs.  They do not (even orders
    survive), so this is a diagnostic companion to
    :func:`lambda1_ring`, not a replacement; see
    :func:`perp_shortcut_gap`.
    """
    if ring.k != 4:
        raise DomainError("the shortcut convention is specific to rings of 4")
    ring.validate(geom)
    if oracle is None:
        oracle = AnnulusOracle(geom, ctrl)
    elif ctrl is not None and oracle.control is not ctrl:
        oracle = oracle.with_control(ctrl)
    pts = ring.points()
    tau = oracle.robin_radial(ring.r).value
    g_anti = oracle.green(pts[0], pts[2]).value
    g_perp_sing = 1.0 / (4.0 * OMEGA * ring.r**2)
    return float(tau - 2.0 * g_perp_sing - g_anti)


@dataclass(frozen=True)
class PerpDiagnostic:
    """Green values at one perpendicular ring pair, both conventions."""

    r: float
    rho_in: float
    series_value: float
    shortcut_value: float
    abs_gap: float
    rel_gap: float


def perp_shortcut_gap(r: float, geom: AnnulusGeometry,
                      ctrl: SeriesControl | None = None) -> PerpDiagnostic:
    """Compare the full series against the singular-only shortcut at a
    perpendicular pair of radius ``r``."""
    ring = RingConfig(4, float(r))
    ring.validate(geom)
    oracle = AnnulusOracle(geom, ctrl)
    pts = ring.points()
    series = oracle.green(pts[0], pts[1]).value
    shortcut = 1.0 / (4.0 * OMEGA * float(r) ** 2)
    gap = abs(series - shortcut)
    return PerpDiagnostic(float(r), geom.rho_in, series, shortcut, gap,
                          gap / max(abs(shortcut), 1e-300))


def dense_radius_grid(geom: AnnulusGeometry, n: int = 512,
                      margin: float = _GRID_MARGIN) -> np.ndarray:
    """Radius grid densified toward both walls, where the level blows up."""
    if not (isinstance(n, int) and n >= 8):
        raise DomainError(f"grid size must be an int >= 8, got {n!r}")
    lo = geom.rho_in + margin
    hi = 1.0 - margin
    if lo >= hi:
        raise DomainError("margins leave no interior radii")
    span = hi - lo
    eps = margin * 1e-3
    n_left = n // 2
    # staggered depths keep the halves disjoint, so the count is exact
    left = lo + np.geomspace(eps, 0.50 * span, n_left - 1)
    right = hi - np.geomspace(eps, 0.45 * span, n - n_left - 1)
    grid = np.sort(np.concatenate(([lo], left, right, [hi])))
    return grid


@dataclass(frozen=True)
class RingScan:
    """Spectral sweep of one ring family over its radius range."""

    k: int
    rho_in: float
    r_grid: np.ndarray
    lambda_by_ell: np.ndarray
    tail_bounds: np.ndarray
    argmin_r: float
    min_value: float
    min_by_ell: np.ndarray
    min_tail_bound: float
    degraded: bool


def _scan_chunk(args):
    k, rho_in, max_terms, target_tol, radii = args
    geom = AnnulusGeometry(rho_in)
    ctrl = SeriesControl(max_terms, target_tol)
    oracle = AnnulusOracle(geom, ctrl)
    rows = []
    for r in radii:
        coeffs = circulant_coeffs(RingConfig(k, float(r)), geom, oracle=oracle)
        eigs = circulant_eigs(coeffs)
        rows.append((eigs, coeffs.worst_tail, coeffs.degraded))
    return rows


def _golden_min(f, a: float, b: float, xtol: float = 1e-10,
                max_iter: int = 200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def min_over_r(k: int, geom: AnnulusGeometry,
               ctrl: SeriesControl | None = None, n_grid: int = 512,
               workers: int = 1, refine_xtol: float = 1e-10) -> RingScan:
    """Scan the ring level over radius, then refine the interior minimum.

    The grid run fills the by-frequency spectrum at every radius; the
    smallest-eigenvalue column is then bracketed at its interior argmin
    and polished by golden section.  Raises :class:`ScanError` when the
    minimum sits on the grid edge (no bracket).
    """
    ctrl = ctrl or SeriesControl()
    grid = dense_radius_grid(geom, n_grid)
    if workers is None or workers < 1:
        workers = os.cpu_count() or 1
    n = grid.size
    if workers > 1 and n >= 64:
        chunks = np.array_split(grid, workers * 4)
        args = [(k, geom.rho_in, ctrl.max_terms, ctrl.target_tol, c.tolist())
                for c in chunks if c.size]
        rows = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_scan_chunk, args):
                rows.extend(part)
    else:
        rows = _scan_chunk((k, geom.rho_in, ctrl.max_terms, ctrl.target_tol,
                            grid.tolist()))
    lam = np.vstack([row[0] for row in rows])
    tails = np.asarray([row[1] for row in rows])
    degraded = any(row[2] for row in rows)

    idx = int(np.argmin(lam[:, 0]))
    if idx == 0 or idx == n - 1:
        raise ScanError(
            f"level minimum sits on the grid edge at r = {grid[idx]:.6g}; "
            "widen the margins or the radius range"
        )
    oracle = AnnulusOracle(geom, ctrl)

    def level(r: float) -> float:
        return lambda1_ring(RingConfig(k, float(r)), geom, oracle=oracle)

    r_star, _ = _golden_min(level, float(grid[idx - 1]), float(grid[idx + 1]),
                            xtol=refine_xtol)
    best = circulant_coeffs(RingConfig(k, r_star), geom, oracle=oracle)
    best_eigs = circulant_eigs(best)
    return RingScan(k, geom.rho_in, grid, lam, tails, float(r_star),
                    float(best_eigs[0]), best_eigs, best.worst_tail,
                    degraded or best.degraded)


@dataclass(frozen=True)
class ThresholdResult:
    """Bisection bracket for the positivity threshold in the inner radius.

    ``rho_star`` is the bracket midpoint, ``bracket_width`` its radius;
    the minimum level is nonpositive at ``rho_star - bracket_width`` and
    positive at ``rho_star + bracket_width``.  ``one_signed`` marks a
    failed bracket (same sign at both endpoints); then ``rho_star`` is
    NaN and the endpoint values tell which side the range sits on."""

    k: int
    rho_star: float
    bracket_width: float
    lo_value: float
    hi_value: float
    one_signed: bool = False
    degraded: bool = False
    evaluations: int = 0


def threshold_rho(k: int, ctrl: SeriesControl | None = None,
                  tol: float = 1e-3, rho_lo: float = 0.01,
                  rho_hi: float = 0.99, n_grid: int = 256,
                  max_terms_cap: int = 20000, workers: int = 1) -> ThresholdResult:
    """Bisect the inner radius at which the minimal ring level turns positive.

    Each probe runs a full radius scan; when the certified tail is not
    an order of magnitude below the minimum's magnitude, the series
    budget is grown (x4) up to ``max_terms_cap`` before accepting the
    sign.  A cap hit marks the result degraded rather than failing.
    """
    ctrl = ctrl or SeriesControl()
    if not 0.0 < rho_lo < rho_hi < 1.0:
        raise DomainError("need 0 < rho_lo < rho_hi < 1")
    if tol <= 0.0:
        raise DomainError("tol must be positive")

    evals = 0
    any_degraded = False

    def certified_min(rho: float) -> float:
        nonlocal evals, any_degraded
        local = ctrl
        while True:
            evals += 1
            scan = min_over_r(k, AnnulusGeometry(rho), local, n_grid=n_grid,
                              workers=workers)
            if scan.min_tail_bound <= abs(scan.min_value) / 10.0:
                return scan.min_value
            if local.max_terms >= max_terms_cap:
                any_degraded = True
                return scan.min_value
            local = local.with_max_terms(min(max_terms_cap, local.max_terms * 4))

    lo, hi = float(rho_lo), float(rho_hi)
    v_lo = certified_min(lo)
    v_hi = certified_min(hi)
    if (v_lo > 0.0) == (v_hi > 0.0):
        warnings.warn(
            f"no sign change on [{lo}, {hi}]: min level "
            f"{v_lo:.3g} .. {v_hi:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
        return ThresholdResult(k, math.nan, 0.5 * (hi - lo), v_lo, v_hi,
                               one_signed=True, degraded=any_degraded,
                               evaluations=evals)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v_mid = certified_min(mid)
        if v_mid > 0.0:
            hi, v_hi = mid, v_mid
        else:
            lo, v_lo = mid, v_mid
    return ThresholdResult(k, 0.5 * (lo + hi), 0.5 * (hi - lo), v_lo, v_hi,
                           one_signed=False, degraded=any_degraded,
                           evaluations=evals)


def sufficient_rho_interval(k: int) -> tuple:
    """Closed-form inner-radius interval of the positivity condition."""
    c = _BOUND_CONST.get(k)
    if c is None:
        raise DomainError(f"closed-form condition known for k in (2, 4), got {k}")
    lo = (8.0 - math.sqrt(64.0 - c * (16.0 - c))) / (16.0 - c)
    return (lo, 1.0)


def _q0_closed(r: float, rho: float) -> float:
    # order-zero radial coefficient on the diagonal, closed form
    return (rho * rho * (1.0 - 2.0 * r * r) / r**4 + 1.0) / (2.0 * (1.0 - rho * rho))


def sufficient_condition_check(k: int, rho_in: float, r_grid) -> np.ndarray:
    """Pointwise closed-form sufficient condition for a positive ring level.

    At each radius the retained order-zero coefficient must outweigh the
    singular parts:

        (8 rho^2 - 16 rho^2 r^2 + 8 r^4) / (r^4 (1 - rho^2)) > c_k / r^2

    with ``c_2 = 1`` and ``c_4 = 5`` (that is, ``16 Q_0(r) > c_k / r^2``).
    Returns one boolean per grid radius.
    """
    c = _BOUND_CONST.get(k)
    if c is None:
        raise DomainError(f"closed-form condition known for k in (2, 4), got {k}")
    geom = AnnulusGeometry(rho_in)
    rho = geom.rho_in
    r_grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    out = np.zeros(r_grid.shape, dtype=bool)
    for i, rv in enumerate(r_grid):
        r = float(rv)
        if not rho < r < 1.0:
            raise DomainError(f"grid radius {r:.6g} outside the annulus")
        lhs = (8.0 * rho**2 - 16.0 * rho**2 * r**2 + 8.0 * r**4) / (
            r**4 * (1.0 - rho**2)
        )
        out[i] = lhs > c / (r * r)
    return out


def lower_bound_report(k: int, geom: AnnulusGeometry,
                       ctrl: SeriesControl | None = None,
                       r_grid=None) -> dict:
    """Check the chain ``level >= (2 Q_0(r) - c_k / (8 r^2)) / omega``.

    Violations are collected as findings rather than raised: a broken
    chain would contradict the derivation and deserves a report, not a
    crash.  For ``k = 4`` the perpendicular-pair diagnostic at the
    midrange radius is attached as context.
    """
    c = _BOUND_CONST.get(k)
    if c is None:
        raise DomainError(f"closed-form bound known for k in (2, 4), got {k}")
    ctrl = ctrl or SeriesControl()
    if r_grid is None:
        r_grid = dense_radius_grid(geom, 64)
    r_grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    oracle = AnnulusOracle(geom, ctrl)
    findings = []
    rows = []
    for r in r_grid:
        lam = lambda1_ring(RingConfig(k, float(r)), geom, oracle=oracle)
        bound = (2.0 * _q0_closed(float(r), geom.rho_in) - c / (8.0 * r * r)) / OMEGA
        ok = lam >= bound - 1e-12
        rows.append({"r": float(r), "lambda1": lam, "bound": float(bound), "ok": ok})
        if not ok:
            findings.append({
                "kind": "lower-bound-violation",
                "r": float(r),
                "lambda1": lam,
                "bound": float(bound),
                "gap": float(bound - lam),
            })
    report = {
        "k": k,
        "rho_in": geom.rho_in,
        "rows": rows,
        "all_ok": not findings,
        "findings": findings,
    }
    if k == 4:
        mid = float(np.median(r_grid))
        report["perp_diagnostic"] = perp_shortcut_gap(mid, geom, ctrl).__dict__
    return report


def discrepancy_report(geom: AnnulusGeometry, ctrl: SeriesControl | None = None,
                       n_grid: int = 256, workers: int = 1) -> dict:
    """Structured comparison of the two k=4 conventions over the radius range.

    Reports the minimum level under the full series and under the
    singular-only shortcut, the perpendicular Green-value gap at both
    minimizers, and whether the conventions agree to within the
    certified tails.  Positivity flags are carried separately so a
    disagreement is visible even when both conventions land on the same
    side of zero.
    """
    ctrl = ctrl or SeriesControl()
    scan = min_over_r(4, geom, ctrl, n_grid=n_grid, workers=workers)
    oracle = AnnulusOracle(geom, ctrl)

    def shortcut_level(r: float) -> float:
        return lambda1_ring_shortcut(RingConfig(4, float(r)), geom, oracle=oracle)

    grid = dense_radius_grid(geom, n_grid)
    vals = np.asarray([shortcut_level(float(r)) for r in grid])
    idx = int(np.argmin(vals))
    if 0 < idx < grid.size - 1:
        r_sc, min_sc = _golden_min(shortcut_level, float(grid[idx - 1]),
                                   float(grid[idx + 1]))
    else:
        r_sc, min_sc = float(grid[idx]), float(vals[idx])
    diag = perp_shortcut_gap(scan.argmin_r, geom, ctrl)
    agree = abs(scan.min_value - min_sc) <= 10.0 * max(scan.min_tail_bound, 1e-12)
    return {
        "rho_in": geom.rho_in,
        "series": {
            "argmin_r": scan.argmin_r,
            "min_value": scan.min_value,
            "tail_bound": scan.min_tail_bound,
            "positive": bool(scan.min_value > 0.0),
        },
        "shortcut": {
            "argmin_r": float(r_sc),
            "min_value": float(min_sc),
            "positive": bool(min_sc > 0.0),
        },
        "perp_gap": {
            "r": diag.r,
            "series_green": diag.series_value,
            "shortcut_green": diag.shortcut_value,
            "abs_gap": diag.abs_gap,
            "rel_gap": diag.rel_gap,
        },
        "conventions_agree": bool(agree),
        "positivity_agrees": bool((scan.min_value > 0.0) == (min_sc > 0.0)),
    }
