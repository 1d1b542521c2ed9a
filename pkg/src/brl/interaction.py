"""Interaction matrix of a point configuration and its ground spectrum.

For points ``xi_1..xi_k`` in the annulus the symmetric matrix ``M`` has
the Robin function on the diagonal and minus the Green function off it:

    M[i, i] =  tau(xi_i),        M[i, j] = -G(xi_i, xi_j)   (i != j).

Since ``G > 0``, the off-diagonal entries are negative, so the smallest
eigenvalue is simple with a sign-definite eigenvector whenever the
configuration is connected through nonzero interactions; the eigenvector
is normalized to have first component 1.

The eigensolver is a hand-rolled cyclic Jacobi iteration.  At the sizes
this package targets (k <= 64) it is exact to roundoff, dependency-free,
and honest about symmetry; general-purpose LAPACK wrappers stay out of
the runtime path on purpose.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .annulus import EvalResult, GradResult
from .errors import DomainError, PerronError, SimplicityError

__all__ = [
    "Configuration",
    "GreenOracle",
    "InteractionMatrix",
    "SpectralData",
    "assemble_m",
    "jacobi_eigh",
    "smallest_eigen",
    "rayleigh",
    "lambda1_gradient",
    "as_point_gradients",
]

# Below this spectral gap the ground eigenpair is treated as degenerate
# for differentiation purposes.
_GAP_FLOOR = 1e-12
_MAX_POINTS = 64


@runtime_checkable
class GreenOracle(Protocol):
    """What the matrix assembly needs from a kernel provider."""

    def green(self, x, y) -> EvalResult: ...

    def robin(self, x) -> EvalResult: ...

    def grad_green(self, x, y) -> GradResult: ...

    def grad_robin(self, x) -> GradResult: ...


@dataclass(frozen=True)
class Configuration:
    """A labeled tuple of interior points with a separation parameter.

    ``sep`` is the scale below which two points count as colliding and
    below which a point counts as touching the boundary; configurations
    are validated against ``2 * sep`` margins.
    """

    points: np.ndarray
    sep: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise DomainError(f"points must have shape (k, 4), got {pts.shape}")
        if pts.shape[0] < 1:
            raise DomainError("need at least one point")
        if pts.shape[0] > _MAX_POINTS:
            raise DomainError(f"at most {_MAX_POINTS} points supported")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points contain non-finite coordinates")
        if not (isinstance(self.sep, (int, float)) and self.sep > 0):
            raise DomainError(f"sep must be positive, got {self.sep!r}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sep", float(self.sep))

    @property
    def k(self) -> int:
        return self.points.shape[0]

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def min_pair_distance(self) -> float:
        if self.k == 1:
            return math.inf
        d = self.points[:, None, :] - self.points[None, :, :]
        dist = np.sqrt((d * d).sum(axis=2))
        return float(dist[np.triu_indices(self.k, 1)].min())

    def validate(self, geometry) -> None:
        """Enforce the separation margins against an annulus geometry."""
        for p in self.points:
            geometry.validate_point(p)
            if geometry.boundary_distance(p) < 2.0 * self.sep:
                raise DomainError(
                    f"point at radius {np.linalg.norm(p):.6g} closer than "
                    f"2*sep = {2 * self.sep:.6g} to the boundary"
                )
        if self.min_pair_distance() < 2.0 * self.sep:
            raise DomainError(
                f"pair distance {self.min_pair_distance():.6g} below 2*sep"
            )

    def replace_points(self, points) -> "Configuration":
        return Configuration(points, self.sep)


@dataclass(frozen=True)
class InteractionMatrix:
    """Assembled matrix plus the accuracy budget it was built under."""

    entries: np.ndarray
    config: Configuration
    worst_tail: float
    degraded: bool = False

    @property
    def k(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SpectralData:
    """Ground eigenpair of an interaction matrix.

    ``eigvec`` is scaled so its first component equals 1; ``gap`` is the
    distance to the second-smallest eigenvalue (inf for k = 1)."""

    lambda1: float
    eigvec: np.ndarray
    gap: float
    residual: float


def assemble_m(config: Configuration, oracle: GreenOracle) -> InteractionMatrix:
    """Build the interaction matrix of ``config`` under ``oracle``."""
    geometry = getattr(oracle, "geometry", None)
    if geometry is not None:
        config.validate(geometry)
    k = config.k
    pts = config.points
    m = np.zeros((k, k))
    worst = 0.0
    degraded = False
    for i in range(k):
        di = oracle.robin(pts[i])
        m[i, i] = di.value
        worst = max(worst, di.tail_bound)
        degraded = degraded or di.degraded
        for j in range(i + 1, k):
            gij = oracle.green(pts[i], pts[j])
            m[i, j] = m[j, i] = -gij.value
            worst = max(worst, gij.tail_bound)
            degraded = degraded or gij.degraded
    return InteractionMatrix(m, config, worst, degraded)


def jacobi_eigh(matrix, tol: float = 1e-13, max_sweeps: int = 64):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ascending and eigenvectors in the
    columns of ``v``.  Sized for small dense problems; raises
    :class:`DomainError` on asymmetric input.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"need a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > _MAX_POINTS:
        raise DomainError(f"solver is sized for n <= {_MAX_POINTS}")
    scale = float(np.abs(a).max()) if n else 0.0
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    if float(np.abs(a - a.T).max(initial=0.0)) > 1e-12 * max(scale, 1.0):
        raise DomainError("matrix is not symmetric")
    v = np.eye(n)
    if n < 2:
        return a.diagonal().copy(), v
    a = 0.5 * (a + a.T)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = math.sqrt(float((a[offdiag] ** 2).sum()))
        if off <= tol * max(scale, np.abs(a.diagonal()).max(), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                diff = float(a[q, q] - a[p, p])
                if abs(apq) < 1e-100 * abs(diff):
                    # rotation angle underflows; dropping the entry is
                    # below the convergence tolerance anyway
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.hypot(theta, 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                for i in range(n):
                    if i == p or i == q:
                        continue
                    aip, aiq = a[i, p], a[i, q]
                    a[i, p] = a[p, i] = c * aip - s * aiq
                    a[i, q] = a[q, i] = c * aiq + s * aip
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def smallest_eigen(matrix) -> SpectralData:
    """Smallest eigenvalue and its sign-definite eigenvector.

    Accepts an :class:`InteractionMatrix` or a bare symmetric array.
    Raises :class:`PerronError` when the ground eigenvector is not
    strictly one-signed after scaling its first component to +1, and
    warns when the spectral gap is too small to trust simplicity.
    """
    entries = matrix.entries if isinstance(matrix, InteractionMatrix) else matrix
    w, v = jacobi_eigh(entries)
    k = len(w)
    lam = float(w[0])
    vec = v[:, 0].copy()
    gap = float(w[1] - w[0]) if k > 1 else math.inf
    norm = float(np.linalg.norm(vec))
    if abs(vec[0]) <= 1e-12 * norm:
        raise PerronError("first eigenvector component vanishes; cannot normalize")
    vec = vec / vec[0]
    if np.any(vec <= 0.0):
        raise PerronError(
            "ground eigenvector is not strictly positive after normalization"
        )
    a = np.asarray(entries, dtype=float)
    residual = float(np.abs(a @ vec - lam * vec).max())
    if gap <= _GAP_FLOOR:
        warnings.warn(
            f"spectral gap {gap:.3g} at or below the simplicity floor",
            RuntimeWarning,
            stacklevel=2,
        )
    return SpectralData(lam, vec, gap, residual)


def rayleigh(matrix, d) -> float:
    """Rayleigh quotient of ``(1, d)`` against the matrix.

    Upper-bounds the smallest eigenvalue for any strictly positive ``d``
    and matches it exactly when ``d`` solves the reduced system.
    """
    entries = matrix.entries if isinstance(matrix, InteractionMatrix) else matrix
    a = np.asarray(entries, dtype=float)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.shape != (a.shape[0] - 1,):
        raise DomainError(
            f"d must have length k-1 = {a.shape[0] - 1}, got {d.shape}"
        )
    if np.any(d <= 0.0):
        raise DomainError("d must be strictly positive")
    dhat = np.concatenate(([1.0], d))
    return float(dhat @ a @ dhat) / float(dhat @ dhat)


def _mtilde_apply(config: Configuration, dhat: np.ndarray, oracle: GreenOracle):
    """Rows of the derivative system applied to ``dhat``.

    Row ``i`` is ``dhat_i * grad tau(xi_i) - 2 * sum_j dhat_j *
    grad_x G(xi_i, xi_j)``; returns ``(rows (k,4), worst_tail, degraded)``.
    """
    k = config.k
    pts = config.points
    rows = np.zeros((k, 4))
    worst = 0.0
    degraded = False
    for i in range(k):
        gri = oracle.grad_robin(pts[i])
        row = dhat[i] * gri.vector
        worst = max(worst, gri.tail_bound)
        degraded = degraded or gri.degraded
        for j in range(k):
            if j == i:
                continue
            gg = oracle.grad_green(pts[i], pts[j])
            row = row - 2.0 * dhat[j] * gg.vector
            worst = max(worst, gg.tail_bound)
            degraded = degraded or gg.degraded
        rows[i] = row
    return rows, worst, degraded


def lambda1_gradient(config: Configuration, oracle: GreenOracle,
                     spectral: SpectralData | None = None,
                     matrix: InteractionMatrix | None = None) -> np.ndarray:
    """Gradient of the smallest eigenvalue in all point coordinates.

    Layout is coordinate-major: the first k entries are the derivatives
    in coordinate 1 of points 1..k, then coordinate 2, and so on (a flat
    4k vector; see :func:`as_point_gradients` for the (k, 4) view).

    Uses first-order perturbation of the normalized eigenpair; requires
    a simple smallest eigenvalue and raises :class:`SimplicityError`
    when the gap is below the floor.
    """
    if matrix is None:
        matrix = assemble_m(config, oracle)
    if spectral is None:
        spectral = smallest_eigen(matrix)
    if spectral.gap <= _GAP_FLOOR:
        raise SimplicityError(
            f"spectral gap {spectral.gap:.3g} too small to differentiate"
        )
    e = spectral.eigvec
    denom = 1.0 + float(np.dot(e[1:], e[1:]))
    rows, _, _ = _mtilde_apply(config, e, oracle)
    k = config.k
    weights = e.copy()
    weights[0] = 1.0
    grads = (weights[:, None] * rows) / denom
    return grads.T.ravel().copy()


def as_point_gradients(flat: np.ndarray, k: int) -> np.ndarray:
    """Reshape a coordinate-major flat gradient to one row per point."""
    flat = np.asarray(flat, dtype=float)
    if flat.shape != (4 * k,):
        raise DomainError(f"expected shape ({4 * k},), got {flat.shape}")
    return flat.reshape(4, k).T.copy()
