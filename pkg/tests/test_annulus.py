import math

import numpy as np
import pytest

from brl import (
    ALPHA4,
    CONSTANTS,
    FRAK_C,
    OMEGA,
    AnnulusGeometry,
    AnnulusOracle,
    DomainError,
    SeriesControl,
    SingularPairError,
    grad_green,
    grad_robin,
    grad_robin_radial,
    green,
    q_m_diag,
    q_m_pair,
    regular_part,
    robin,
    robin_radial,
)

from conftest import random_admissible_points
from oracles import fd_laplacian_4d, richardson_grad

# frozen against SeriesControl(2000, 1e-16); tails there are ~5e-17
TAU_07 = 0.17323653234411393
G_PERP_07 = 0.00037841504409992163
G_MIXED = 0.018657725495377947
G_ANTI_07 = 2.775858752648852e-06
Q0_077 = 0.6805497709287797


def test_constants_coupling():
    assert OMEGA == pytest.approx(2.0 * math.pi**2, rel=1e-15)
    assert ALPHA4 == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-15)
    # the projection coefficient is twice alpha4 times omega
    assert FRAK_C == pytest.approx(2.0 * ALPHA4 * OMEGA, rel=4e-16)
    assert CONSTANTS.omega == OMEGA


def test_geometry_validation():
    geom = AnnulusGeometry(0.5)
    assert geom.contains([0.7, 0, 0, 0])
    assert not geom.contains([0.4, 0, 0, 0])
    assert not geom.contains([1.1, 0, 0, 0])
    assert geom.boundary_distance([0.7, 0, 0, 0]) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        AnnulusGeometry(1.2)
    with pytest.raises(DomainError):
        AnnulusGeometry(0.0)
    with pytest.raises(DomainError):
        geom.validate_point([0.2, 0, 0, 0])
    with pytest.raises(DomainError):
        geom.validate_point([0.7, 0, 0])


class TestRadialProfiles:
    def setup_method(self):
        self.geom = AnnulusGeometry(0.5)

    def test_order_zero_diagonal(self):
        assert q_m_diag(0, 0.7, self.geom) == pytest.approx(Q0_077, rel=1e-14)
        assert q_m_pair(0, 0.7, 0.7, self.geom) == pytest.approx(Q0_077, rel=1e-14)

    def test_pair_reduces_to_diagonal(self):
        for m in (0, 1, 5, 20):
            for s in (0.55, 0.7, 0.94):
                assert q_m_pair(m, s, s, self.geom) == pytest.approx(
                    q_m_diag(m, s, self.geom), rel=1e-12
                )

    def test_outer_limit(self):
        # numerator degenerates at s = 1 leaving t^m / (2m + 2)
        val = q_m_pair(0, 1.0 - 1e-8, 0.6, self.geom)
        assert val == pytest.approx(0.5, abs=1e-7)

    def test_nonnegative(self):
        for m in range(0, 40):
            for s in np.linspace(0.51, 0.99, 25):
                assert q_m_diag(m, float(s), self.geom) >= 0.0

    def test_sqrt_rho_point(self):
        geom = AnnulusGeometry(0.25)
        s = math.sqrt(0.25)
        assert q_m_pair(0, s, s, geom) == pytest.approx(
            q_m_diag(0, s, geom), rel=1e-14
        )
        assert q_m_diag(0, s, geom) == pytest.approx(0.8, rel=1e-13)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            q_m_pair(0, 0.4, 0.7, self.geom)
        with pytest.raises(DomainError):
            q_m_diag(-1, 0.7, self.geom)


class TestGreen:
    def setup_method(self):
        self.geom = AnnulusGeometry(0.5)

    def test_frozen_values(self):
        x = np.array([0.7, 0, 0, 0.0])
        res = green(x, np.array([0, 0.7, 0, 0.0]), self.geom)
        assert res.value == pytest.approx(G_PERP_07, abs=2e-10)
        assert abs(res.value - G_PERP_07) <= res.tail_bound + 1e-15
        res = green(x, np.array([0.5, 0.5, 0, 0.0]), self.geom)
        assert res.value == pytest.approx(G_MIXED, abs=2e-10)
        res = green(x, np.array([-0.7, 0, 0, 0.0]), self.geom)
        assert res.value == pytest.approx(G_ANTI_07, abs=2e-10)

    def test_symmetry(self, rng):
        for _ in range(12):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            a = green(x, y, self.geom).value
            b = green(y, x, self.geom).value
            assert a == pytest.approx(b, abs=1e-12, rel=1e-12)

    def test_positive_interior(self, rng):
        for _ in range(12):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            assert green(x, y, self.geom).value > 0.0

    def test_dominated_by_singular_factor(self, rng):
        for _ in range(12):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            sing = 1.0 / (2.0 * OMEGA * float(np.dot(x - y, x - y)))
            assert green(x, y, self.geom).value < sing

    def test_coincident_pair_refused(self):
        x = np.array([0.7, 0, 0, 0.0])
        with pytest.raises(SingularPairError):
            green(x, x, self.geom)
        with pytest.raises(SingularPairError):
            green(x, x + 1e-15, self.geom)

    def test_outside_domain_refused(self):
        with pytest.raises(DomainError):
            green([0.3, 0, 0, 0], [0.7, 0, 0, 0], self.geom)

    def test_near_boundary_vanishing(self):
        # Dirichlet condition: within 1e-3 of a wall the value is zero
        # up to the (degraded) certificate
        y = np.array([0.7, 0, 0, 0.0])
        for s in (1.0 - 1e-3, 0.5 + 1e-3):
            x = np.array([s, 0, 0, 0.0])
            res = green(x, y, self.geom)
            assert res.degraded
            assert abs(res.value) <= 10.0 * res.tail_bound

    def test_eval_result_contract(self, rng):
        ctrl = SeriesControl(max_terms=40, target_tol=1e-10)
        for _ in range(10):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            res = green(x, y, self.geom, ctrl)
            assert res.tail_bound <= ctrl.target_tol or (
                res.terms_used == ctrl.max_terms and res.degraded
            )

    def test_tail_bound_dominates(self, rng, oracle_half_hi):
        # 50 random pairs: the certified bound covers the truncation error
        for _ in range(50):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            coarse = green(x, y, self.geom, SeriesControl(25, 1e-16))
            fine = oracle_half_hi.green(x, y)
            err = abs(coarse.value - fine.value)
            assert err <= coarse.tail_bound + 1e-15


class TestRobin:
    def setup_method(self):
        self.geom = AnnulusGeometry(0.5)

    def test_frozen_value(self):
        res = robin_radial(0.7, self.geom)
        assert res.value == pytest.approx(TAU_07, abs=2e-10)
        assert abs(res.value - TAU_07) <= res.tail_bound + 1e-15

    def test_radial_invariance_exact(self):
        a = robin([0.7, 0, 0, 0], self.geom).value
        b = robin([0, 0, 0.7, 0], self.geom).value
        assert a == b

    def test_growth_toward_walls(self):
        near_min = robin_radial(0.707, self.geom).value
        assert robin_radial(0.9, self.geom).value > near_min
        assert robin_radial(0.55, self.geom).value > near_min

    def test_blows_up_at_both_walls(self):
        mid = robin_radial(0.7, self.geom).value
        assert robin_radial(0.5 + 1e-3, self.geom).value > 10.0 * mid
        assert robin_radial(1.0 - 1e-3, self.geom).value > 10.0 * mid

    def test_consistency_with_regular_part(self):
        # H(x, x) along the diagonal equals the Robin value
        x = np.array([0.7, 0, 0, 0.0])
        h = regular_part(x, x, self.geom)
        tau = robin(x, self.geom)
        assert h.value == pytest.approx(tau.value, abs=2e-10)

    def test_green_minus_singularity_approaches_robin(self):
        # tangential offset of 1e-4: G - S -> -tau within 1e-6
        x = np.array([0.7, 0, 0, 0.0])
        y = np.array([0.7 * math.cos(1e-4 / 0.7), 0.7 * math.sin(1e-4 / 0.7),
                      0.0, 0.0])
        g = green(x, y, self.geom, SeriesControl(400, 1e-13))
        sing = 1.0 / (2.0 * OMEGA * float(np.dot(x - y, x - y)))
        tau = robin_radial(0.7, self.geom).value
        assert g.value - sing == pytest.approx(-tau, abs=1e-6)


class TestGradients:
    def setup_method(self):
        self.geom = AnnulusGeometry(0.5)

    def test_grad_green_matches_fd(self, rng):
        for _ in range(8):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            got = grad_green(x, y, self.geom).vector
            ref = richardson_grad(
                lambda v: green(v, y, self.geom).value, x, h=1e-5
            )
            assert np.abs(got - ref).max() <= 1e-5 * max(np.abs(ref).max(), 1.0)

    def test_grad_green_antipodal_alignment(self):
        # at y = -x the pair sits on a common line through the origin;
        # the gradient keeps that axial symmetry
        x = np.array([0.7, 0, 0, 0.0])
        g = grad_green(x, -x, self.geom).vector
        assert np.abs(g[1:]).max() <= 1e-12 * abs(g[0])

    def test_grad_robin_tangential_zero(self):
        g = grad_robin([0.7, 0, 0, 0], self.geom).vector
        assert g[1] == 0.0 and g[2] == 0.0 and g[3] == 0.0

    def test_grad_robin_matches_fd(self, rng):
        for _ in range(6):
            (x,) = random_admissible_points(rng, 1, self.geom, 0.02)
            got = grad_robin(x, self.geom).vector
            ref = richardson_grad(
                lambda v: robin(v, self.geom).value, x, h=1e-5
            )
            assert np.abs(got - ref).max() <= 1e-5 * max(np.abs(ref).max(), 1.0)

    def test_radial_derivative_sign_change(self):
        # negative below the minimizing radius, positive above
        lo = grad_robin_radial(0.65, self.geom).value
        hi = grad_robin_radial(0.78, self.geom).value
        assert lo < 0.0 < hi

    def test_grad_tail_certificate(self, rng, oracle_half_hi):
        for _ in range(10):
            x, y = random_admissible_points(rng, 2, self.geom, 0.02)
            coarse = grad_green(x, y, self.geom, SeriesControl(25, 1e-16))
            fine = oracle_half_hi.grad_green(x, y)
            err = float(np.linalg.norm(coarse.vector - fine.vector))
            assert err <= coarse.tail_bound + 1e-13


def test_regular_part_harmonic():
    # discrete Laplacian of H in x stays small away from the pole
    geom = AnnulusGeometry(0.5)
    ctrl = SeriesControl(600, 1e-14)
    y = np.array([0.72, 0.05, 0, 0.0])

    def h_at(x):
        return regular_part(x, y, geom, ctrl).value

    for x in ([0.7, 0, 0, 0.0], [0.0, -0.8, 0.05, 0.0], [0.4, 0.4, 0.3, 0.0]):
        lap = fd_laplacian_4d(h_at, np.array(x), h=1e-3)
        assert abs(lap) <= 1e-2


def test_oracle_bundle_matches_free_functions(oracle_half, geom_half):
    x = np.array([0.7, 0, 0, 0.0])
    y = np.array([0, 0.7, 0, 0.0])
    assert oracle_half.green(x, y).value == pytest.approx(
        green(x, y, geom_half).value, rel=1e-13
    )
    assert oracle_half.robin(x).value == robin(x, geom_half).value
    gg = oracle_half.grad_green(x, y).vector
    assert np.allclose(gg, grad_green(x, y, geom_half).vector, rtol=1e-13)


def test_with_control_and_certification(geom_half):
    oracle = AnnulusOracle(geom_half, SeriesControl(5, 1e-12))
    res = oracle.green([0.7, 0, 0, 0], [0, 0.7, 0, 0])
    assert res.degraded and res.terms_used == 5
    from brl import SeriesError

    with pytest.raises(SeriesError):
        oracle.require_certified(res)
    better = oracle.with_control(SeriesControl(200, 1e-10))
    res2 = better.green([0.7, 0, 0, 0], [0, 0.7, 0, 0])
    assert not res2.degraded
    better.require_certified(res2)
