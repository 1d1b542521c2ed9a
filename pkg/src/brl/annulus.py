"""Dirichlet Green function of the Laplacian on a 4d annulus, by zonal series.

The domain is ``{rho_in < |x| < 1}`` in R^4.  The Green function splits as

    G(x, y) = 1 / (2 omega |x - y|^2)  -  H(x, y),

where ``omega = 2 pi**2`` and the regular part ``H`` is harmonic in each
variable and matches the singular factor on both boundary spheres.  ``H``
is evaluated as a series over spherical-harmonic orders ``m``:

    H(x, y) = (1 / omega) * sum_m  (m + 1) * P1_m(cos) * Q_m(|x|, |y|),

with ``P1_m`` the degree-one Gegenbauer family and ``Q_m`` the radial
profile fixed by the two boundary conditions.  ``Q_m`` is evaluated in a
subtraction-free arrangement whose terms decay like ``q1**m`` and
``q2**m`` with

    q1 = rho_in**2 / (s t),    q2 = s t,    s = |x|, t = |y|,

both strictly below 1 in the open annulus.  Every evaluation returns the
partial sum together with a certified bound on the omitted tail; the
bound is a closed form on the dominating geometric-polynomial series.

Near the boundary the decay ratios degrade toward 1 and no fixed-length
partial sum can certify a small tail.  Inside a thin band (width 1e-2)
the reported bound is therefore evaluated at the worst same-radius pair,
the sum runs to its full budget, and the result carries a degraded flag.
Inflating the ratios can only increase the bound, so domination of the
true tail is preserved in all regimes.

The kernel derivatives (with respect to the first argument) follow from
differentiating the radial profiles and the Gegenbauer recurrence; their
tails are certified the same way with cubic-weight geometric sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import OMEGA
from .errors import DomainError, SeriesError, SingularPairError
from .gegenbauer import GegenbauerEvaluator

__all__ = [
    "AnnulusGeometry",
    "SeriesControl",
    "EvalResult",
    "GradResult",
    "q_m_pair",
    "q_m_diag",
    "green",
    "regular_part",
    "robin",
    "robin_radial",
    "grad_green",
    "grad_robin",
    "grad_robin_radial",
    "AnnulusOracle",
]

# Width of the near-boundary band where tail ratios are inflated to the
# worst same-radius pair.
_BOUNDARY_BAND = 1e-2
# Squared-distance floor below which the pole makes evaluation meaningless.
_PAIR_GUARD_SQ = 1e-28
# Ratios at or above this are treated as 1: the dominating series diverges.
_RATIO_CEIL = 1.0 - 1e-12


@dataclass(frozen=True)
class AnnulusGeometry:
    """Annulus ``rho_in < |x| < 1`` in R^4."""

    rho_in: float

    def __post_init__(self):
        r = self.rho_in
        if not (isinstance(r, (int, float)) and math.isfinite(r)):
            raise DomainError(f"rho_in must be a finite real, got {r!r}")
        if not 0.0 < r < 1.0:
            raise DomainError(f"rho_in must lie in (0, 1), got {r}")
        object.__setattr__(self, "rho_in", float(r))

    def boundary_distance(self, x) -> float:
        """Distance from ``x`` to the nearer boundary sphere (signed:
        negative outside the closed annulus)."""
        s = float(np.linalg.norm(np.asarray(x, dtype=float)))
        return min(s - self.rho_in, 1.0 - s)

    def contains(self, x, margin: float = 0.0) -> bool:
        """Whether ``x`` lies in the open annulus, at least ``margin`` from
        both spheres."""
        return self.boundary_distance(x) > margin

    def validate_point(self, x) -> np.ndarray:
        """Return ``x`` as a float 4-vector strictly inside the annulus."""
        x = np.asarray(x, dtype=float)
        if x.shape != (4,):
            raise DomainError(f"points are 4-vectors, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError("point has non-finite coordinates")
        s = float(np.linalg.norm(x))
        if not self.rho_in < s < 1.0:
            raise DomainError(
                f"|x| = {s:.6g} outside open annulus ({self.rho_in}, 1)"
            )
        return x


@dataclass(frozen=True)
class SeriesControl:
    """Budget and accuracy target for one series evaluation.

    ``target_tol`` is the tail size at which summation stops early;
    ``max_terms`` caps the number of spherical-harmonic orders."""

    max_terms: int = 200
    target_tol: float = 1e-10

    def __post_init__(self):
        if not (isinstance(self.max_terms, int) and self.max_terms >= 1):
            raise DomainError(f"max_terms must be a positive int, got {self.max_terms!r}")
        if not (self.target_tol > 0.0 and math.isfinite(self.target_tol)):
            raise DomainError(f"target_tol must be positive, got {self.target_tol!r}")

    def with_max_terms(self, max_terms: int) -> "SeriesControl":
        return SeriesControl(max_terms=max_terms, target_tol=self.target_tol)


@dataclass(frozen=True)
class EvalResult:
    """A certified scalar evaluation.

    Invariant: either ``tail_bound <= target_tol`` of the controlling
    :class:`SeriesControl`, or ``terms_used`` equals its ``max_terms`` and
    ``degraded`` is set."""

    value: float
    tail_bound: float
    terms_used: int
    degraded: bool = False


@dataclass(frozen=True)
class GradResult:
    """A certified gradient evaluation; ``tail_bound`` dominates the
    Euclidean norm of the omitted series remainder."""

    vector: np.ndarray
    tail_bound: float
    terms_used: int
    degraded: bool = False


def _t1(q: float, m_last: int) -> float:
    # sum_{m > m_last} (m+1) q^m, closed form; q in [0, 1).
    if q <= 0.0:
        return 0.0
    if q >= _RATIO_CEIL:
        return math.inf
    n = m_last + 1
    return q**n * ((n + 1) - n * q) / (1.0 - q) ** 2


def _t_alpha(q: float, m_last: int, alpha: int) -> float:
    # Ratio-bounded sum_{m > m_last} (m+1)^alpha q^m.
    if q <= 0.0:
        return 0.0
    if q >= _RATIO_CEIL:
        return math.inf
    n = m_last + 1
    ratio = q * ((n + 2) / (n + 1)) ** alpha
    if ratio >= 1.0:
        return math.inf
    return (n + 1) ** alpha * q**n / (1.0 - ratio)


def _pair_frame(x, y, geom):
    """Shared geometry for a two-point series: radii, cosine, ratios."""
    x = geom.validate_point(x)
    y = geom.validate_point(y)
    s = float(np.linalg.norm(x))
    t = float(np.linalg.norm(y))
    u = float(np.clip(np.dot(x, y) / (s * t), -1.0, 1.0))
    rho = geom.rho_in
    q1 = rho * rho / (s * t)
    q2 = s * t
    band = min(s - rho, 1.0 - s, t - rho, 1.0 - t) < _BOUNDARY_BAND
    if band:
        big, small = max(s, t), min(s, t)
        q1_eff = max(q1, rho * rho / (small * small))
        q2_eff = max(q2, big * big)
    else:
        q1_eff, q2_eff = q1, q2
    return x, y, s, t, u, q1, q2, q1_eff, q2_eff


def _series_h(x, y, geom, ctrl, evaluator=None):
    """Partial sum of the regular-part series and its certified tail.

    Returns ``(acc, tail, terms, degraded, frame)`` where the reported
    tail already includes the ``1/omega`` prefactor of the kernel."""
    x, y, s, t, u, q1, q2, q1e, q2e = _pair_frame(x, y, geom)
    rho = geom.rho_in
    rho2 = rho * rho
    st = s * t
    pref = 1.0 / (2.0 * OMEGA * (1.0 - rho2))

    seq = None
    if evaluator is not None and evaluator.max_degree >= ctrl.max_terms - 1:
        seq = evaluator.values(u)

    # running powers, index m: p1 = q1^(m+1), s2 = s^(2m+2), t2 = t^(2m+2),
    # stm = (st)^m, rr = rho^(2m+2)
    p1 = q1
    s2 = s * s
    t2 = t * t
    stm = 1.0
    rr = rho2
    u_prev, u_curr = 0.0, 1.0  # P1_{-1}, P1_0
    acc = 0.0
    tail = math.inf
    m = 0
    while m < ctrl.max_terms:
        pm = seq[m] if seq is not None else u_curr
        qm = (p1 * (1.0 - s2 - t2) / st + stm) / ((2 * m + 2) * (1.0 - rr))
        acc += (m + 1) * pm * qm
        tail = pref * (q1 * _t1(q1e, m) / st + _t1(q2e, m))
        m += 1
        if tail <= ctrl.target_tol:
            break
        p1 *= q1
        s2 *= s * s
        t2 *= t * t
        stm *= st
        rr *= rho2
        if seq is None:
            u_prev, u_curr = u_curr, 2.0 * u * u_curr - u_prev
    degraded = tail > ctrl.target_tol
    return acc, tail, m, degraded, (x, y, s, t, u)


def _checked_radius(s, geom: AnnulusGeometry) -> float:
    s = float(s)
    if not geom.rho_in < s < 1.0:
        raise DomainError(f"radius {s:.6g} outside open annulus ({geom.rho_in}, 1)")
    return s


def q_m_pair(m: int, s: float, t: float, geom: AnnulusGeometry) -> float:
    """Order-``m`` radial profile of the regular-part series at radii s, t.

    Direct rational form; the series evaluators use an equivalent
    subtraction-free arrangement.  Reduces to :func:`q_m_diag` at s = t.
    """
    if not (isinstance(m, (int, np.integer)) and m >= 0):
        raise DomainError(f"order must be a nonnegative integer, got {m!r}")
    s = _checked_radius(s, geom)
    t = _checked_radius(t, geom)
    rho = geom.rho_in
    e = 2 * m + 2
    num = rho**e - rho**e * (s**e + t**e) + (s * t) ** e
    den = e * (s * t) ** (m + 2) * (1.0 - rho**e)
    return num / den


def q_m_diag(m: int, s: float, geom: AnnulusGeometry) -> float:
    """Diagonal radial profile: :func:`q_m_pair` at coincident radii."""
    if not (isinstance(m, (int, np.integer)) and m >= 0):
        raise DomainError(f"order must be a nonnegative integer, got {m!r}")
    s = _checked_radius(s, geom)
    rho = geom.rho_in
    e = 2 * m + 2
    num = rho**e - 2.0 * rho**e * s**e + s ** (2 * e)
    den = e * s ** (e + 2) * (1.0 - rho**e)
    return num / den


def regular_part(x, y, geom: AnnulusGeometry, ctrl: SeriesControl | None = None,
                 evaluator: GegenbauerEvaluator | None = None) -> EvalResult:
    """Regular part ``H(x, y)``: harmonic companion of the singular factor."""
    ctrl = ctrl or SeriesControl()
    acc, tail, terms, degraded, _ = _series_h(x, y, geom, ctrl, evaluator)
    return EvalResult(acc / OMEGA, tail, terms, degraded)


def green(x, y, geom: AnnulusGeometry, ctrl: SeriesControl | None = None,
          evaluator: GegenbauerEvaluator | None = None) -> EvalResult:
    """Green function ``G(x, y)`` for the Dirichlet Laplacian.

    ``G`` is symmetric, positive in the open annulus, and vanishes as
    either argument approaches a boundary sphere.  Raises
    :class:`SingularPairError` when the arguments (nearly) coincide.
    """
    ctrl = ctrl or SeriesControl()
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape == (4,) and ya.shape == (4,):
        dsq = float(np.dot(xa - ya, xa - ya))
        if dsq < _PAIR_GUARD_SQ:
            raise SingularPairError(
                f"evaluation points coincide to within {math.sqrt(_PAIR_GUARD_SQ):g}"
            )
    acc, tail, terms, degraded, frame = _series_h(x, y, geom, ctrl, evaluator)
    xv, yv = frame[0], frame[1]
    dsq = float(np.dot(xv - yv, xv - yv))
    sing = 1.0 / (2.0 * OMEGA * dsq)
    return EvalResult(sing - acc / OMEGA, tail, terms, degraded)


def robin_radial(s: float, geom: AnnulusGeometry,
                 ctrl: SeriesControl | None = None) -> EvalResult:
    """Diagonal of the regular part at radius ``s``: the Robin function.

    Rotation invariance makes the value a function of ``|x|`` alone, so
    pass the radius; :func:`robin` accepts the full point."""
    ctrl = ctrl or SeriesControl()
    s = float(s)
    rho = geom.rho_in
    if not rho < s < 1.0:
        raise DomainError(f"radius {s:.6g} outside open annulus ({rho}, 1)")
    rho2 = rho * rho
    q1 = (rho / s) ** 2
    q2 = s * s
    pref = 1.0 / (2.0 * OMEGA * (1.0 - rho2))

    p1 = q1
    s2 = s * s          # s^(2m+2)
    stm = 1.0           # s^(2m)
    rr = rho2
    acc = 0.0
    tail = math.inf
    m = 0
    while m < ctrl.max_terms:
        qm = (p1 * (1.0 - 2.0 * s2) / (s * s) + stm) / ((2 * m + 2) * (1.0 - rr))
        acc += (m + 1) * (m + 1) * qm
        tail = pref * (q1 * _t1(q1, m) / (s * s) + _t1(q2, m))
        m += 1
        if tail <= ctrl.target_tol:
            break
        p1 *= q1
        s2 *= s * s
        stm *= s * s
        rr *= rho2
    return EvalResult(acc / OMEGA, tail, m, tail > ctrl.target_tol)


def robin(x, geom: AnnulusGeometry, ctrl: SeriesControl | None = None) -> EvalResult:
    """Robin function at the point ``x`` (see :func:`robin_radial`)."""
    x = geom.validate_point(x)
    return robin_radial(float(np.linalg.norm(x)), geom, ctrl)


def grad_green(x, y, geom: AnnulusGeometry, ctrl: SeriesControl | None = None,
               evaluator: GegenbauerEvaluator | None = None) -> GradResult:
    """Gradient of ``G`` in its first argument."""
    ctrl = ctrl or SeriesControl()
    xv, yv, s, t, u, q1, q2, q1e, q2e = _pair_frame(x, y, geom)
    dvec = xv - yv
    dsq = float(np.dot(dvec, dvec))
    if dsq < _PAIR_GUARD_SQ:
        raise SingularPairError("evaluation points coincide")
    rho = geom.rho_in
    rho2 = rho * rho
    st = s * t
    xhat = xv / s
    yhat = yv / t
    ang = (yhat - u * xhat) / s

    dseq = vseq = None
    if evaluator is not None and evaluator.max_degree >= ctrl.max_terms - 1:
        vseq = evaluator.values(u)
        dseq = evaluator.derivatives(u)

    p1 = q1
    s2 = s * s
    t2 = t * t
    stm = 1.0
    rr = rho2
    u_pp, u_p = 0.0, 1.0          # P1 values
    du_pp, du_p = 0.0, 0.0        # P1 derivatives
    acc = np.zeros(4)
    tail = math.inf
    m = 0
    while m < ctrl.max_terms:
        if vseq is not None:
            pm, dpm = vseq[m], dseq[m]
        else:
            pm, dpm = u_p, du_p
        denom = (2 * m + 2) * (1.0 - rr)
        a_part = p1 * (1.0 - s2 - t2) / st
        qm = (a_part + stm) / denom
        # d/ds of the two radial pieces; the first identity is exact for
        # this arrangement, not a bound
        da = -(m + 2) * a_part / s - (2 * m + 2) * p1 * (s2 / (s * s)) / t
        db = m * stm / s
        dqm = (da + db) / denom
        acc += (m + 1) * (dqm * pm * xhat + qm * dpm * ang)
        tail = (
            (1.0 + s * s) / (s * s * t) * q1 * _t_alpha(q1e, m, 2)
            + _t_alpha(q2e, m, 2) / (2.0 * s)
            + (q1 * _t_alpha(q1e, m, 3) / st + _t_alpha(q2e, m, 3)) / (6.0 * s)
        ) / (OMEGA * (1.0 - rho2))
        m += 1
        if tail <= ctrl.target_tol:
            break
        p1 *= q1
        s2 *= s * s
        t2 *= t * t
        stm *= st
        rr *= rho2
        if vseq is None:
            nxt = 2.0 * u * u_p - u_pp
            dnx = 2.0 * u_p + 2.0 * u * du_p - du_pp
            u_pp, u_p = u_p, nxt
            du_pp, du_p = du_p, dnx
    sing_grad = -dvec / (OMEGA * dsq * dsq)
    return GradResult(sing_grad - acc / OMEGA, tail, m, tail > ctrl.target_tol)


def grad_robin_radial(s: float, geom: AnnulusGeometry,
                      ctrl: SeriesControl | None = None) -> EvalResult:
    """Radial derivative of the Robin function at radius ``s``."""
    ctrl = ctrl or SeriesControl()
    s = float(s)
    rho = geom.rho_in
    if not rho < s < 1.0:
        raise DomainError(f"radius {s:.6g} outside open annulus ({rho}, 1)")
    rho2 = rho * rho
    q1 = (rho / s) ** 2
    q2 = s * s

    p1 = q1
    s2 = s * s
    rr = rho2
    acc = 0.0
    tail = math.inf
    m = 0
    while m < ctrl.max_terms:
        denom = (2 * m + 2) * (1.0 - rr)
        a_part = p1 * (1.0 - 2.0 * s2) / (s * s)
        da = -(2 * m + 4) * a_part / s - 2.0 * (2 * m + 2) * p1 * s2 / (s * s * s)
        db = 2.0 * m * (s2 / (s * s)) / s
        acc += (m + 1) * (m + 1) * (da + db) / denom
        tail = (
            2.0 * (1.0 + s * s) / s**3 * q1 * _t_alpha(q1, m, 2)
            + _t_alpha(q2, m, 2) / s
        ) / (OMEGA * (1.0 - rho2))
        m += 1
        if tail <= ctrl.target_tol:
            break
        p1 *= q1
        s2 *= s * s
        rr *= rho2
    return EvalResult(acc / OMEGA, tail, m, tail > ctrl.target_tol)


def grad_robin(x, geom: AnnulusGeometry, ctrl: SeriesControl | None = None) -> GradResult:
    """Gradient of the Robin function at ``x`` (radial by symmetry)."""
    x = geom.validate_point(x)
    s = float(np.linalg.norm(x))
    radial = grad_robin_radial(s, geom, ctrl)
    return GradResult(radial.value * (x / s), radial.tail_bound,
                      radial.terms_used, radial.degraded)


class AnnulusOracle:
    """Kernel evaluations on one annulus behind a uniform interface.

    Bundles the geometry, a series budget, and a shared Gegenbauer cache.
    Anything that consumes pairwise kernels (interaction matrices, ring
    sweeps, profiles) takes one of these rather than loose parameters.
    """

    def __init__(self, geometry: AnnulusGeometry,
                 control: SeriesControl | None = None):
        if not isinstance(geometry, AnnulusGeometry):
            geometry = AnnulusGeometry(float(geometry))
        self.geometry = geometry
        self.control = control or SeriesControl()
        self._geg = GegenbauerEvaluator(max(0, self.control.max_terms - 1))

    def with_control(self, control: SeriesControl) -> "AnnulusOracle":
        return AnnulusOracle(self.geometry, control)

    def green(self, x, y) -> EvalResult:
        return green(x, y, self.geometry, self.control, evaluator=self._geg)

    def regular_part(self, x, y) -> EvalResult:
        return regular_part(x, y, self.geometry, self.control, evaluator=self._geg)

    def robin(self, x) -> EvalResult:
        return robin(x, self.geometry, self.control)

    def robin_radial(self, s) -> EvalResult:
        return robin_radial(s, self.geometry, self.control)

    def grad_green(self, x, y) -> GradResult:
        return grad_green(x, y, self.geometry, self.control, evaluator=self._geg)

    def grad_robin(self, x) -> GradResult:
        return grad_robin(x, self.geometry, self.control)

    def require_certified(self, result):
        """Raise :class:`SeriesError` when a result is degraded."""
        if result.degraded:
            raise SeriesError(
                f"series tail {result.tail_bound:.3g} above target "
                f"{self.control.target_tol:.3g} after {result.terms_used} terms"
            )
        return result
