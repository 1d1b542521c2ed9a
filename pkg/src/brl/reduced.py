"""Reduced system in the ratio and level variables, and its diagnostics.

For a fixed admissible configuration the interaction matrix ``M`` pins a
level ``lambda`` and a positive ratio vector ``d`` through

    M (1, d)^T = lambda (1, d)^T,

solved here both as an eigenproblem and as the linear system
``(Mbar - lambda I) d = Gbar`` over the trailing block.  ``eval_f1``,
``eval_f2`` and ``eval_f3`` expose the residual maps whose joint zero is
that solution; ``schur_det_check`` validates the determinant identity of
the ``(d, lambda)`` Jacobian block; ``residual_c0``/``residual_report``
evaluate the leading-order expansion residuals at concentration scales
produced by :func:`brl.bubbles.rates`; and ``critical_search`` descends
the smallest eigenvalue over configuration space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bubbles import rates
from .errors import ConvergenceError, DomainError, SingularSystemError
from .interaction import (
    Configuration,
    InteractionMatrix,
    SpectralData,
    _mtilde_apply,
    as_point_gradients,
    assemble_m,
    jacobi_eigh,
    lambda1_gradient,
    smallest_eigen,
)
from .numdiff import fd_hessian

__all__ = [
    "ReducedSolution",
    "ResidualReport",
    "StabilityReport",
    "CriticalSearchResult",
    "solve_d_lambda",
    "eval_f1",
    "eval_f2",
    "eval_f3",
    "schur_det_check",
    "residual_c0",
    "residual_c0_bracket",
    "residual_ci",
    "residual_report",
    "kl_functional",
    "lambda1_fd_hessian",
    "critical_search",
]


@dataclass(frozen=True)
class ReducedSolution:
    """Solved level and ratios for one configuration.

    ``eig_residual`` is the max-norm defect of the eigen-equation at
    ``(1, d)``; ``det_check`` is the relative error of the Jacobian
    determinant identity (0 for k = 1, where the identity is vacuous)."""

    lambda1: float
    d: np.ndarray
    eig_residual: float
    det_check: float


@dataclass(frozen=True)
class ResidualReport:
    """Leading-order expansion residuals at one ``(epsilon, d, lambda)``."""

    c0: np.ndarray
    ci: np.ndarray
    epsilon: float
    deltas: np.ndarray
    underflow: bool = False


def _split_blocks(entries: np.ndarray):
    """Trailing block and first-row couplings of an interaction matrix."""
    mbar = entries[1:, 1:]
    gbar = -entries[0, 1:]
    return mbar, gbar


def _schur_relative_error(entries: np.ndarray, lam: float, d: np.ndarray) -> float:
    k = entries.shape[0]
    if k == 1:
        return 0.0
    mbar, gbar = _split_blocks(entries)
    a = mbar - lam * np.eye(k - 1)
    jac = np.zeros((k, k))
    jac[0, :-1] = -gbar
    jac[0, -1] = -1.0
    jac[1:, :-1] = a
    jac[1:, -1] = -d
    lhs = float(np.linalg.det(jac))
    # row order fixes the orientation: expanding the lambda column after
    # eliminating the first row leaves (-1)^k, confirmed by direct 2x2
    # and 3x3 expansions
    rhs = float((-1.0) ** k * np.linalg.det(a) * (1.0 + float(np.dot(d, d))))
    return abs(lhs - rhs) / abs(rhs)


def solve_d_lambda(config: Configuration, oracle,
                   matrix: InteractionMatrix | None = None) -> ReducedSolution:
    """Solve the reduced system at ``config``.

    The level is the smallest eigenvalue; the ratios come from the
    trailing linear system, which the spectral gap keeps invertible.
    Raises :class:`SingularSystemError` when that invertibility premise
    fails numerically.
    """
    if matrix is None:
        matrix = assemble_m(config, oracle)
    spectral = smallest_eigen(matrix)
    k = config.k
    if k == 1:
        return ReducedSolution(spectral.lambda1, np.zeros(0), spectral.residual, 0.0)
    mbar, gbar = _split_blocks(matrix.entries)
    a = mbar - spectral.lambda1 * np.eye(k - 1)
    det = float(np.linalg.det(a))
    scale = float(np.linalg.norm(mbar, 2)) if k > 1 else 1.0
    if abs(det) <= 1e-12 * max(scale, 1e-300) ** (k - 1):
        raise SingularSystemError(
            f"trailing block is numerically singular: |det| = {abs(det):.3g}"
        )
    d = np.linalg.solve(a, gbar)
    dhat = np.concatenate(([1.0], d))
    eig_residual = float(np.abs(matrix.entries @ dhat - spectral.lambda1 * dhat).max())
    det_check = _schur_relative_error(matrix.entries, spectral.lambda1, d)
    return ReducedSolution(spectral.lambda1, d, eig_residual, det_check)


def _checked_d(config: Configuration, d) -> np.ndarray:
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.shape != (config.k - 1,):
        raise DomainError(f"d must have length k-1 = {config.k - 1}, got {d.shape}")
    return d


def eval_f1(config: Configuration, d, lam: float, oracle) -> float:
    """First residual: level equation at the leading point."""
    d = _checked_d(config, d)
    pts = config.points
    total = oracle.robin(pts[0]).value
    for j in range(1, config.k):
        total -= d[j - 1] * oracle.green(pts[0], pts[j]).value
    return float(total - lam)


def eval_f2(config: Configuration, d, lam: float, oracle) -> np.ndarray:
    """Trailing residuals: ``(Mbar - lam I) d - Gbar``."""
    d = _checked_d(config, d)
    matrix = assemble_m(config, oracle)
    mbar, gbar = _split_blocks(matrix.entries)
    return (mbar - float(lam) * np.eye(config.k - 1)) @ d - gbar


def eval_f3(config: Configuration, d, oracle) -> np.ndarray:
    """Stacked derivative residuals, one block of k per coordinate.

    Block ``l`` holds ``dhat_i * grad_l tau(xi_i) - 2 sum_j dhat_j *
    grad_l G(xi_i, xi_j)`` for ``i = 1..k`` with ``dhat = (1, d)``; the
    flat layout matches :func:`brl.interaction.lambda1_gradient`, which
    is this vector rescaled by the eigenvector weights.
    """
    d = _checked_d(config, d)
    if np.any(d <= 0.0):
        raise DomainError("d must be strictly positive")
    dhat = np.concatenate(([1.0], d))
    rows, _, _ = _mtilde_apply(config, dhat, oracle)
    return rows.T.ravel().copy()


def schur_det_check(config: Configuration, oracle) -> float:
    """Relative error of the Jacobian determinant identity at the solution.

    The ``(d, lambda)`` block of the residual Jacobian has determinant
    ``(-1)**k det(Mbar - lambda1 I) (1 + |d|^2)``; returns
    ``|lhs - rhs| / |rhs|`` with both sides evaluated independently.
    Vacuously 0 for k = 1.
    """
    return solve_d_lambda(config, oracle).det_check


def residual_c0(config: Configuration, d, lam: float, epsilon: float,
                oracle) -> np.ndarray:
    """Leading constant-mode expansion residual per point.

    ``c0_h = delta_h**2 tau(xi_h) - sum_{i != h} delta_i delta_h
    G(xi_i, xi_h) + epsilon delta_h**2 log(delta_h) / (8 pi^2)``.
    The log factor is carried exactly through the rate exponents, so the
    result stays meaningful when the scales are denormal-small (all
    zeros once they underflow entirely).
    """
    d = _checked_d(config, d)
    rr = rates(epsilon, lam, d)
    deltas = rr.deltas
    dhat = np.concatenate(([1.0], d))
    log_deltas = rr.log_delta1 + np.log(dhat)
    k = config.k
    pts = config.points
    out = np.zeros(k)
    for h in range(k):
        dh = deltas[h]
        if dh == 0.0:
            continue
        acc = dh * dh * oracle.robin(pts[h]).value
        for i in range(k):
            if i == h:
                continue
            acc -= deltas[i] * dh * oracle.green(pts[i], pts[h]).value
        acc += float(epsilon) * dh * dh * log_deltas[h] / (8.0 * math.pi**2)
        out[h] = acc
    return out


def residual_c0_bracket(config: Configuration, d, lam: float, oracle) -> np.ndarray:
    """The scale-free bracket inside ``residual_c0`` at exact rates.

    Component ``h`` is ``tau(xi_h) - sum_{i != h} (dhat_i / dhat_h)
    G(xi_i, xi_h) - lam``; by the eigen-equation it vanishes identically
    at a solved ``(d, lam)`` for every ``epsilon``.  The full residual
    additionally carries ``epsilon log(d_h) / (8 pi^2)``, which is zero
    only where the ratios are 1.
    """
    d = _checked_d(config, d)
    dhat = np.concatenate(([1.0], d))
    pts = config.points
    k = config.k
    out = np.zeros(k)
    for h in range(k):
        acc = oracle.robin(pts[h]).value
        for i in range(k):
            if i == h:
                continue
            acc -= (dhat[i] / dhat[h]) * oracle.green(pts[i], pts[h]).value
        out[h] = acc - float(lam)
    return out


def residual_ci(config: Configuration, d, lam: float, epsilon: float,
                oracle) -> np.ndarray:
    """Leading gradient-mode expansion residuals, one row per point.

    Row ``h`` is ``delta_h**2 grad tau(xi_h) - 2 delta_h sum_i delta_i
    grad G(xi_h, xi_i)``: the scale-weighted counterpart of the
    ``eval_f3`` blocks.  ``lam`` enters only through the rates.
    """
    d = _checked_d(config, d)
    rr = rates(epsilon, lam, d)
    rows, _, _ = _mtilde_apply(config, rr.deltas, oracle)
    return rr.deltas[:, None] * rows


def residual_report(config: Configuration, d, lam: float, epsilon: float,
                    oracle) -> ResidualReport:
    """Bundle the c0 and ci residuals with the rates that produced them."""
    d = _checked_d(config, d)
    rr = rates(epsilon, lam, d)
    c0 = residual_c0(config, d, lam, epsilon, oracle)
    ci = residual_ci(config, d, lam, epsilon, oracle)
    return ResidualReport(c0, ci, float(epsilon), rr.deltas, rr.underflow)


def kl_functional(config: Configuration, d_full, lambda1_ref: float, oracle,
                  include_factor: bool = False) -> float:
    """Quadratic diagnostic ``d M d^T - c lambda_ref |d|^2``.

    With ``include_factor`` the reference level is scaled by
    ``1 / (8 pi^2)`` (the energy normalization); without it the
    functional vanishes exactly when ``d_full`` is an eigenvector for
    ``lambda1_ref``.  Both conventions are exposed on purpose.
    """
    d_full = np.atleast_1d(np.asarray(d_full, dtype=float))
    if d_full.shape != (config.k,):
        raise DomainError(f"d_full must have length k = {config.k}, got {d_full.shape}")
    if np.any(d_full < 0.0):
        raise DomainError("d_full must be nonnegative")
    matrix = assemble_m(config, oracle)
    c = 1.0 / (8.0 * math.pi**2) if include_factor else 1.0
    quad = float(d_full @ matrix.entries @ d_full)
    return quad - c * float(lambda1_ref) * float(np.dot(d_full, d_full))


def _lambda1_raw(flat: np.ndarray, k: int, oracle) -> float:
    """Smallest eigenvalue from flat coordinates, no margin enforcement.

    FD stencils step slightly off the feasible set; the kernels only
    need the open annulus, so margins are not checked here."""
    pts = np.asarray(flat, dtype=float).reshape(k, 4)
    m = np.zeros((k, k))
    for i in range(k):
        m[i, i] = oracle.robin(pts[i]).value
        for j in range(i + 1, k):
            g = oracle.green(pts[i], pts[j]).value
            m[i, j] = m[j, i] = -g
    return smallest_eigen(m).lambda1


def lambda1_fd_hessian(config: Configuration, oracle, h: float = 1e-4):
    """FD Hessian of the smallest eigenvalue over all point coordinates.

    Returns ``(eigenvalues, hessian)`` with the spectrum ascending.
    Coordinates are flattened point-major (point 1's four coordinates
    first)."""
    k = config.k
    flat = config.points.ravel().copy()
    hess = fd_hessian(lambda z: _lambda1_raw(z, k, oracle), flat, h=h)
    eigs, _ = jacobi_eigh(hess)
    return eigs, hess


@dataclass(frozen=True)
class StabilityReport:
    """FD Hessian summary at a terminal configuration.

    ``radial_curvature`` is the quadratic form along the simultaneous
    outward-radial direction; rotational invariance guarantees zero
    modes in the full spectrum, so the classification looks at signs
    outside a +-``classify_tol`` dead band."""

    hessian_eigenvalues: np.ndarray
    radial_curvature: float
    classification: str
    step: float
    classify_tol: float


@dataclass(frozen=True)
class CriticalSearchResult:
    """Outcome of a descent run on the smallest eigenvalue."""

    config: Configuration
    spectral: SpectralData
    converged: bool
    iterations: int
    grad_norm: float
    lambda1_path: list = field(default_factory=list)
    boundary_hits: int = 0
    stability: StabilityReport | None = None
    message: str = ""


def _classify(eigs: np.ndarray, tol: float) -> str:
    if np.all(eigs > tol):
        return "strict local minimum"
    if np.all(eigs < -tol):
        return "local maximum"
    if np.all(eigs >= -tol):
        return "degenerate critical point (nonnegative spectrum)"
    if np.all(eigs <= tol):
        return "degenerate critical point (nonpositive spectrum)"
    return "saddle point"


def critical_search(initial: Configuration, oracle, grad_tol: float = 1e-8,
                    max_iter: int = 500, step0: float = 0.1,
                    shrink: float = 0.5, grow: float = 1.3,
                    armijo: float = 1e-4, max_backtracks: int = 60,
                    hessian_h: float = 1e-4, classify_tol: float = 1e-6,
                    with_stability: bool = True) -> CriticalSearchResult:
    """Projected gradient descent on the smallest eigenvalue.

    Steps follow the analytic gradient with Armijo backtracking;
    candidates violating the separation or boundary margins shrink the
    step instead of failing (each such event counts as a boundary hit).
    On termination an FD Hessian over all point coordinates provides
    the stability report.  Accepted levels are strictly monotone
    decreasing by construction.
    """
    geometry = getattr(oracle, "geometry", None)
    if geometry is not None:
        initial.validate(geometry)
    k = initial.k

    def feasible(points: np.ndarray) -> bool:
        cand = Configuration(points, initial.sep)
        if geometry is None:
            return cand.min_pair_distance() >= 2.0 * cand.sep
        try:
            cand.validate(geometry)
        except DomainError:
            return False
        return True

    def lam_at(points: np.ndarray):
        cfg = Configuration(points, initial.sep)
        matrix = assemble_m(cfg, oracle)
        return cfg, matrix, smallest_eigen(matrix)

    config = initial
    matrix = assemble_m(config, oracle)
    spectral = smallest_eigen(matrix)
    lam = spectral.lambda1
    path = [lam]
    step = float(step0)
    hits = 0
    converged = False
    message = ""
    gnorm = math.inf
    iterations = 0

    for iterations in range(max_iter + 1):
        flat = lambda1_gradient(config, oracle, spectral=spectral, matrix=matrix)
        grad = as_point_gradients(flat, k)
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= grad_tol:
            converged = True
            message = "gradient norm below tolerance"
            break
        if iterations == max_iter:
            message = "iteration budget exhausted"
            break
        alpha = step
        accepted = False
        for _ in range(max_backtracks):
            cand_pts = config.points - alpha * grad
            if not feasible(cand_pts):
                hits += 1
                alpha *= shrink
                continue
            cand_cfg, cand_matrix, cand_spec = lam_at(cand_pts)
            if cand_spec.lambda1 <= lam - armijo * alpha * gnorm * gnorm:
                config, matrix, spectral = cand_cfg, cand_matrix, cand_spec
                lam = cand_spec.lambda1
                path.append(lam)
                step = min(alpha * grow, 10.0 * step0)
                accepted = True
                break
            alpha *= shrink
        if not accepted:
            message = "line search could not reduce the level further"
            converged = gnorm <= grad_tol
            break

    stability = None
    if with_stability:
        eigs, hess = lambda1_fd_hessian(config, oracle, h=hessian_h)
        radial = np.zeros(4 * k)
        for i in range(k):
            p = config.points[i]
            radial[4 * i: 4 * i + 4] = p / np.linalg.norm(p)
        radial /= math.sqrt(k)
        curvature = float(radial @ hess @ radial)
        stability = StabilityReport(eigs, curvature, _classify(eigs, classify_tol),
                                    hessian_h, classify_tol)

    return CriticalSearchResult(config, spectral, converged, iterations, gnorm,
                                path, hits, stability, message)
