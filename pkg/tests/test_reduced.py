"""Reduced-system solves, expansion residuals, and the descent driver."""

import math

import numpy as np
import pytest

from brl.bubbles import rates
from brl.errors import DomainError
from brl.interaction import (
    Configuration,
    as_point_gradients,
    assemble_m,
    lambda1_gradient,
    smallest_eigen,
)
from brl.reduced import (
    critical_search,
    eval_f1,
    eval_f2,
    eval_f3,
    kl_functional,
    lambda1_fd_hessian,
    residual_c0,
    residual_c0_bracket,
    residual_ci,
    residual_report,
    schur_det_check,
    solve_d_lambda,
)
from conftest import random_admissible_points, solvable_config
from oracles import det_cofactor

# frozen with a 2000-term series (tails ~5e-17)
R_STAR_K2 = 0.7299480316257507
MIN_K2 = 0.16393817701771912

EIGHT_PI_SQ = 8.0 * math.pi**2


def ring(k, r, sep=0.02):
    ang = 2.0 * np.pi * np.arange(k) / k
    pts = np.zeros((k, 4))
    pts[:, 0] = r * np.cos(ang)
    pts[:, 1] = r * np.sin(ang)
    return Configuration(pts, sep)


def antipodal(r, sep=0.02):
    return Configuration(np.array([[r, 0.0, 0.0, 0.0], [-r, 0.0, 0.0, 0.0]]), sep)


class TestSolve:
    def test_symmetric_ring_unit_ratios(self, oracle_half):
        sol = solve_d_lambda(ring(4, 0.72), oracle_half)
        assert sol.d.shape == (3,)
        np.testing.assert_allclose(sol.d, 1.0, rtol=0, atol=1e-12)
        assert sol.eig_residual <= 1e-10
        assert sol.det_check <= 1e-8

    def test_matches_spectral_data(self, rng, geom_half, oracle_half):
        pts = random_admissible_points(rng, 3, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        spec = smallest_eigen(assemble_m(cfg, oracle_half))
        assert abs(sol.lambda1 - spec.lambda1) <= 1e-14 * abs(spec.lambda1)
        # the ratios come from an independent linear solve, not a copy of
        # the eigenvector tail
        np.testing.assert_allclose(sol.d, spec.eigvec[1:], rtol=1e-10, atol=1e-12)

    def test_single_point_degenerates_to_kernel_diagonal(self, oracle_half):
        cfg = Configuration(np.array([[0.7, 0.0, 0.0, 0.0]]), 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        assert sol.d.size == 0
        tau = oracle_half.robin(np.array([0.7, 0.0, 0.0, 0.0]))
        assert abs(sol.lambda1 - tau.value) <= 1e-14
        assert sol.det_check == 0.0

    def test_random_configs_are_well_posed(self, rng, geom_half, oracle_half):
        for k in (2, 3, 4):
            for _ in range(2):
                _, sol = solvable_config(rng, k, geom_half, oracle_half)
                assert sol.eig_residual <= 1e-10
                assert np.all(sol.d > 0.0)

    def test_refuses_singular_trailing_block(self, oracle_half):
        # weak outer coupling makes the level collide with the trailing
        # block's spectrum
        from brl.errors import SingularSystemError
        from brl.interaction import InteractionMatrix
        pts = np.array([[0.7, 0.0, 0.0, 0.0], [0.0, 0.7, 0.0, 0.0],
                        [-0.7, 0.0, 0.0, 0.0]])
        cfg = Configuration(pts, 0.02)
        g, t = 2e-7, 0.1
        entries = np.array([[1.0, -g, -g], [-g, 1.0, -t], [-g, -t, 1.0]])
        fake = InteractionMatrix(entries, cfg, 0.0)
        with pytest.raises(SingularSystemError):
            solve_d_lambda(cfg, oracle_half, matrix=fake)


class TestResidualEquations:
    def test_vanish_at_solution(self, rng, geom_half, oracle_half):
        pts = random_admissible_points(rng, 3, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        scale = 1.0 + abs(sol.lambda1)
        assert abs(eval_f1(cfg, sol.d, sol.lambda1, oracle_half)) <= 1e-12 * scale
        f2 = eval_f2(cfg, sol.d, sol.lambda1, oracle_half)
        assert f2.shape == (2,)
        assert np.max(np.abs(f2)) <= 1e-12 * scale

    def test_level_enters_affinely(self, rng, geom_half, oracle_half):
        pts = random_admissible_points(rng, 2, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        h = 0.37
        f_base = eval_f1(cfg, sol.d, sol.lambda1, oracle_half)
        f_up = eval_f1(cfg, sol.d, sol.lambda1 + h, oracle_half)
        assert abs((f_base - f_up) - h) <= 1e-14

    def test_zero_level_single_point_is_the_diagonal(self, oracle_half):
        cfg = Configuration(np.array([[0.7, 0.0, 0.0, 0.0]]), 0.02)
        tau = oracle_half.robin(np.array([0.7, 0.0, 0.0, 0.0]))
        got = eval_f1(cfg, np.zeros(0), 0.0, oracle_half)
        assert abs(got - tau.value) <= 1e-14

    def test_derivative_blocks_match_eigen_gradient(self, rng, geom_half,
                                                    oracle_half):
        # the analytic gradient is the f3 stack rescaled by the
        # eigenvector weights
        pts = random_admissible_points(rng, 3, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        dhat = np.concatenate(([1.0], sol.d))
        f3 = eval_f3(cfg, sol.d, oracle_half)
        assert f3.shape == (12,)
        grad = lambda1_gradient(cfg, oracle_half)
        weight = dhat / float(dhat @ dhat)
        pred = np.tile(weight, 4) * f3
        np.testing.assert_allclose(pred, grad, rtol=0, atol=1e-14)


class TestSchurIdentity:
    def test_relative_error_small_across_sizes(self, rng, geom_half,
                                               oracle_half):
        for k in (2, 3, 5):
            cfg, sol = solvable_config(rng, k, geom_half, oracle_half)
            assert sol.det_check <= 1e-8
            assert schur_det_check(cfg, oracle_half) <= 1e-8

    def test_identity_against_fd_jacobian(self, rng, geom_half, oracle_half):
        # rebuild the (d, level) Jacobian by central differences and take
        # its determinant with the cofactor expansion
        cfg, sol = solvable_config(rng, 3, geom_half, oracle_half)
        k = cfg.k

        def res_vec(z):
            d, lam = z[:-1], z[-1]
            return np.concatenate((
                [eval_f1(cfg, d, lam, oracle_half)],
                eval_f2(cfg, d, lam, oracle_half),
            ))

        z0 = np.concatenate((sol.d, [sol.lambda1]))
        h = 1e-6
        jac = np.empty((k, k))
        for j in range(k):
            zp, zm = z0.copy(), z0.copy()
            zp[j] += h
            zm[j] -= h
            jac[:, j] = (res_vec(zp) - res_vec(zm)) / (2.0 * h)
        lhs = det_cofactor(jac)

        mbar = assemble_m(cfg, oracle_half).entries[1:, 1:]
        shifted = mbar - sol.lambda1 * np.eye(k - 1)
        rhs = (-1.0) ** k * det_cofactor(shifted) * (1.0 + float(sol.d @ sol.d))
        assert abs(lhs - rhs) <= 1e-5 * max(abs(rhs), 1e-12)


class TestExpansionResiduals:
    def test_bracket_scale_free_zero(self, rng, geom_half, oracle_half):
        pts = random_admissible_points(rng, 3, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        br = residual_c0_bracket(cfg, sol.d, sol.lambda1, oracle_half)
        assert br.shape == (3,)
        assert np.max(np.abs(br)) <= 1e-10

    def test_ring_constant_mode_vanishes(self, oracle_half):
        cfg = ring(3, 0.7)
        sol = solve_d_lambda(cfg, oracle_half)
        c0 = residual_c0(cfg, sol.d, sol.lambda1, 0.5, oracle_half)
        rr = rates(0.5, sol.lambda1, sol.d)
        assert np.max(np.abs(c0)) <= 1e-10 * rr.deltas[0] ** 2

    def test_detuned_level_shows_linear_defect(self, oracle_half):
        # inflating the level by 10% leaves a bracket of exactly -0.1 lam,
        # so the residual over delta**2 recovers it
        cfg = ring(3, 0.7)
        sol = solve_d_lambda(cfg, oracle_half)
        lam_off = 1.1 * sol.lambda1
        c0 = residual_c0(cfg, sol.d, lam_off, 0.5, oracle_half)
        rr = rates(0.5, lam_off, sol.d)
        ratio = np.abs(c0) / rr.deltas**2
        np.testing.assert_allclose(ratio, 0.1 * sol.lambda1, rtol=1e-8)

    def test_gradient_mode_matches_weighted_gradient(self, rng, geom_half,
                                                     oracle_half):
        pts = random_admissible_points(rng, 3, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        ci = residual_ci(cfg, sol.d, sol.lambda1, 0.5, oracle_half)
        assert ci.shape == (3, 4)
        rr = rates(0.5, sol.lambda1, sol.d)
        dhat = np.concatenate(([1.0], sol.d))
        rows = as_point_gradients(lambda1_gradient(cfg, oracle_half), 3)
        pred = rr.deltas[0] ** 2 * float(dhat @ dhat) * rows
        np.testing.assert_allclose(ci, pred, rtol=1e-10, atol=1e-40)

    def test_gradient_mode_vanishes_at_critical_ring(self, oracle_half):
        cfg = antipodal(R_STAR_K2)
        sol = solve_d_lambda(cfg, oracle_half)
        ci = residual_ci(cfg, sol.d, sol.lambda1, 0.5, oracle_half)
        rr = rates(0.5, sol.lambda1, sol.d)
        assert np.max(np.abs(ci)) <= 1e-7 * rr.deltas[0] ** 2

    def test_report_bundles_consistently(self, oracle_half):
        cfg = ring(3, 0.7)
        sol = solve_d_lambda(cfg, oracle_half)
        rep = residual_report(cfg, sol.d, sol.lambda1, 0.5, oracle_half)
        assert rep.epsilon == 0.5
        assert not rep.underflow
        rr = rates(0.5, sol.lambda1, sol.d)
        np.testing.assert_array_equal(rep.deltas, rr.deltas)
        np.testing.assert_array_equal(
            rep.c0, residual_c0(cfg, sol.d, sol.lambda1, 0.5, oracle_half))
        np.testing.assert_array_equal(
            rep.ci, residual_ci(cfg, sol.d, sol.lambda1, 0.5, oracle_half))

    def test_underflow_keeps_everything_finite(self, oracle_half):
        cfg = ring(3, 0.7)
        sol = solve_d_lambda(cfg, oracle_half)
        rep = residual_report(cfg, sol.d, sol.lambda1, 1e-3, oracle_half)
        assert rep.underflow
        np.testing.assert_array_equal(rep.deltas, 0.0)
        np.testing.assert_array_equal(rep.c0, 0.0)
        np.testing.assert_array_equal(rep.ci, 0.0)


class TestQuadraticDiagnostic:
    def test_vanishes_on_the_eigenvector(self, rng, geom_half, oracle_half):
        pts = random_admissible_points(rng, 3, geom_half, 0.02)
        cfg = Configuration(pts, 0.02)
        sol = solve_d_lambda(cfg, oracle_half)
        dhat = np.concatenate(([1.0], sol.d))
        bare = kl_functional(cfg, dhat, sol.lambda1, oracle_half)
        assert abs(bare) <= 1e-12
        scaled = kl_functional(cfg, dhat, EIGHT_PI_SQ * sol.lambda1,
                               oracle_half, include_factor=True)
        assert abs(scaled) <= 1e-12

    def test_nonnegative_above_the_level(self, rng, geom_half, oracle_half):
        cfg, sol = solvable_config(rng, 3, geom_half, oracle_half)
        for _ in range(5):
            vec = rng.uniform(0.1, 2.0, size=3)
            assert kl_functional(cfg, vec, sol.lambda1, oracle_half) >= -1e-12
        basis = np.array([1.0, 0.0, 0.0])
        assert kl_functional(cfg, basis, sol.lambda1, oracle_half) > 1e-6


class TestStability:
    def test_fd_hessian_shape_and_symmetry(self, oracle_half):
        eigs, hess = lambda1_fd_hessian(antipodal(R_STAR_K2), oracle_half)
        assert hess.shape == (8, 8)
        assert np.max(np.abs(hess - hess.T)) == 0.0
        assert np.all(np.diff(eigs) >= 0.0)
        # two stiff modes from the radial pair, the rest near zero
        assert eigs[-1] > 1.0
        assert np.sum(np.abs(eigs) < 1e-3) == 6


class TestCriticalSearch:
    def test_converges_to_the_ring_minimum(self, oracle_half):
        res = critical_search(antipodal(0.6), oracle_half, classify_tol=1e-3)
        assert res.converged
        radii = np.linalg.norm(res.config.points, axis=1)
        np.testing.assert_allclose(radii, R_STAR_K2, rtol=0, atol=1e-6)
        assert abs(res.spectral.lambda1 - MIN_K2) <= 1e-9
        path = np.asarray(res.lambda1_path)
        assert np.all(np.diff(path) < 0.0)
        assert res.stability is not None
        assert res.stability.radial_curvature > 0.0
        assert res.stability.classification in (
            "strict local minimum",
            "degenerate critical point (nonnegative spectrum)",
        )

    def test_flat_start_returns_immediately(self, oracle_half):
        res = critical_search(antipodal(R_STAR_K2), oracle_half,
                              grad_tol=1e-6, with_stability=False)
        assert res.converged
        assert res.iterations == 0
        assert res.grad_norm <= 1e-6
        assert res.stability is None

    def test_oversized_steps_count_boundary_hits(self, oracle_half):
        res = critical_search(antipodal(0.9), oracle_half, step0=5.0,
                              with_stability=False)
        assert res.converged
        assert res.boundary_hits > 0
        radii = np.linalg.norm(res.config.points, axis=1)
        np.testing.assert_allclose(radii, R_STAR_K2, rtol=0, atol=1e-6)

    def test_rejects_infeasible_start(self, oracle_half):
        bad = Configuration(
            np.array([[0.505, 0.0, 0.0, 0.0], [-0.7, 0.0, 0.0, 0.0]]), 0.02)
        with pytest.raises(DomainError):
            critical_search(bad, oracle_half)
