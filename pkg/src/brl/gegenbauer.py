"""Degree-one Gegenbauer polynomials and zonal kernels on the 3-sphere.

The family ``P1_m`` used here coincides with the Chebyshev polynomials of
the second kind: they are the coefficients of the generating function
``(1 - 2 t r + r^2)**-1`` in powers of ``r``.  Everything is evaluated by
the forward three-term recurrence, which is numerically stable on the
closed interval [-1, 1]; derivatives come from differentiating the
recurrence rather than from any closed form.

Useful facts baked into the tests:

* ``P1_m(1) = m + 1`` and ``P1_m(-1) = (-1)**m (m + 1)``,
* ``P1_{2j}(0) = (-1)**j`` and ``P1_{2j+1}(0) = 0``,
* ``|P1_m(t)| <= m + 1`` on [-1, 1],
* ``|P1_m'(t)| <= m (m + 1) (m + 2) / 3`` on [-1, 1], attained at 1.

The zonal kernel of spherical-harmonic order ``m`` in four dimensions is
``Z_m(cos) = (m + 1) * P1_m(cos)``; its value at ``cos = 1`` is
``(m + 1)**2``, the dimension of the order-``m`` eigenspace.
"""

from __future__ import annotations

import numbers

import numpy as np

from .errors import DomainError

__all__ = [
    "gegenbauer_p1",
    "gegenbauer_p1_sequence",
    "gegenbauer_p1_prime",
    "gegenbauer_p1_prime_sequence",
    "gegenbauer_parity_check",
    "zonal_z",
    "GegenbauerEvaluator",
]

# Tolerated floating-point overshoot of the closed interval [-1, 1]:
# inner products of unit vectors routinely land at 1 + few*eps.
_T_SLACK = 1e-12


def _checked_degree(m) -> int:
    if isinstance(m, bool) or not isinstance(m, numbers.Integral):
        raise DomainError(f"degree must be an integer, got {m!r}")
    m = int(m)
    if m < 0:
        raise DomainError(f"degree must be nonnegative, got {m}")
    return m


def _checked_argument(t) -> float:
    try:
        t = float(t)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"argument must be a real scalar, got {t!r}") from exc
    if not np.isfinite(t) or abs(t) > 1.0 + _T_SLACK:
        raise DomainError(f"argument must lie in [-1, 1], got {t!r}")
    return float(np.clip(t, -1.0, 1.0))


def gegenbauer_p1_sequence(max_m: int, t: float) -> np.ndarray:
    """Values ``P1_0(t), ..., P1_max_m(t)`` by the forward recurrence.

    Parameters
    ----------
    max_m : int
        Largest degree wanted, ``>= 0``.
    t : float
        Evaluation point in ``[-1, 1]`` (a hair of floating-point
        overshoot is clipped).

    Returns
    -------
    numpy.ndarray
        Shape ``(max_m + 1,)``, entry ``m`` holding ``P1_m(t)``.
    """
    max_m = _checked_degree(max_m)
    t = _checked_argument(t)
    out = np.empty(max_m + 1)
    out[0] = 1.0
    if max_m == 0:
        return out
    out[1] = 2.0 * t
    for m in range(2, max_m + 1):
        out[m] = 2.0 * t * out[m - 1] - out[m - 2]
    return out


def gegenbauer_p1(m: int, t: float) -> float:
    """Single value ``P1_m(t)``; wraps the sequence recurrence."""
    return float(gegenbauer_p1_sequence(m, t)[m])


def gegenbauer_p1_prime_sequence(max_m: int, t: float) -> np.ndarray:
    """Derivatives ``P1_m'(t)`` for ``m = 0..max_m``.

    Differentiating the recurrence gives
    ``P1_m' = 2 P1_{m-1} + 2 t P1_{m-1}' - P1_{m-2}'`` with
    ``P1_0' = 0`` and ``P1_1' = 2``; both sequences are carried together.
    """
    max_m = _checked_degree(max_m)
    t = _checked_argument(t)
    dout = np.empty(max_m + 1)
    dout[0] = 0.0
    if max_m == 0:
        return dout
    dout[1] = 2.0
    p_prev, p_curr = 1.0, 2.0 * t
    for m in range(2, max_m + 1):
        dout[m] = 2.0 * p_curr + 2.0 * t * dout[m - 1] - dout[m - 2]
        p_prev, p_curr = p_curr, 2.0 * t * p_curr - p_prev
    return dout


def gegenbauer_p1_prime(m: int, t: float) -> float:
    """Single derivative value ``P1_m'(t)``."""
    return float(gegenbauer_p1_prime_sequence(m, t)[m])


def gegenbauer_parity_check(m: int, t: float) -> bool:
    """Whether ``P1_m(-t) == (-1)**m P1_m(t)`` holds to roundoff.

    A cheap self-test hook: the recurrence preserves parity exactly in
    exact arithmetic, so failures beyond a few ulps indicate a broken
    evaluator, not a mathematical surprise.
    """
    m = _checked_degree(m)
    t = _checked_argument(t)
    left = gegenbauer_p1(m, -t)
    right = ((-1.0) ** m) * gegenbauer_p1(m, t)
    scale = max(1.0, abs(right))
    return bool(abs(left - right) <= 1e-12 * scale)


def zonal_z(m: int, cos_angle: float) -> float:
    """Order-``m`` zonal kernel on the 3-sphere: ``(m + 1) P1_m(cos)``.

    At ``cos_angle = 1`` this equals ``(m + 1)**2``, the multiplicity of
    the order-``m`` spherical harmonics in four dimensions.
    """
    m = _checked_degree(m)
    return (m + 1) * gegenbauer_p1(m, cos_angle)


class GegenbauerEvaluator:
    """Sequence evaluator with a small per-argument cache.

    Ring sweeps evaluate whole series at a fixed angle for many radii,
    so re-running the recurrence per call would dominate the cost.  The
    cache is keyed by the exact float bit pattern; no rounding games.

    Parameters
    ----------
    max_degree : int
        Highest degree the evaluator will ever be asked for.
    cache_size : int, optional
        Number of distinct arguments kept (FIFO eviction).
    """

    def __init__(self, max_degree: int, cache_size: int = 32):
        self.max_degree = _checked_degree(max_degree)
        if cache_size < 1:
            raise DomainError("cache_size must be at least 1")
        self._cache_size = int(cache_size)
        self._values: dict[float, np.ndarray] = {}
        self._derivs: dict[float, np.ndarray] = {}

    def _evict(self, store: dict) -> None:
        while len(store) > self._cache_size:
            store.pop(next(iter(store)))

    def values(self, t: float) -> np.ndarray:
        """Cached ``P1_0(t)..P1_max_degree(t)`` (do not mutate)."""
        t = _checked_argument(t)
        hit = self._values.get(t)
        if hit is None:
            hit = gegenbauer_p1_sequence(self.max_degree, t)
            hit.setflags(write=False)
            self._values[t] = hit
            self._evict(self._values)
        return hit

    def derivatives(self, t: float) -> np.ndarray:
        """Cached derivative sequence at ``t`` (do not mutate)."""
        t = _checked_argument(t)
        hit = self._derivs.get(t)
        if hit is None:
            hit = gegenbauer_p1_prime_sequence(self.max_degree, t)
            hit.setflags(write=False)
            self._derivs[t] = hit
            self._evict(self._derivs)
        return hit

    def zonal(self, m: int, t: float) -> float:
        """Zonal kernel value through the cache."""
        m = _checked_degree(m)
        if m > self.max_degree:
            raise DomainError(
                f"degree {m} exceeds evaluator limit {self.max_degree}"
            )
        return (m + 1) * float(self.values(t)[m])
