"""EKF tests: covariance health, Jacobians, and a trilateration oracle."""

import math
import random

import numpy as np
import pytest

from nanoswarm.localization import INNOVATION_GATE, NoiseConfig, PositionEkf


def _psd(cov, tol=-1e-10):
    return np.all(np.linalg.eigvalsh(cov) > tol)


class TestBasics:
    def test_initial_state(self):
        ekf = PositionEkf((1.5, 2.5))
        assert ekf.position == (1.5, 2.5)
        assert ekf.velocity == (0.0, 0.0)
        assert _psd(ekf.cov)

    def test_noise_validation(self):
        with pytest.raises(ValueError):
            NoiseConfig(process_accel_sigma=0.0)
        with pytest.raises(ValueError):
            NoiseConfig(range_meas_sigma=-0.1)

    def test_predict_bad_dt(self):
        with pytest.raises(ValueError):
            PositionEkf((0.0, 0.0)).predict((0.0, 0.0), 0.0, 0.0)

    def test_predict_constant_velocity(self):
        ekf = PositionEkf((0.0, 0.0))
        ekf.mean[2:] = [0.5, 0.0]
        for _ in range(100):
            ekf.predict((0.0, 0.0), 0.0, 0.01)
        assert ekf.position[0] == pytest.approx(0.5)
        assert ekf.time == pytest.approx(1.0)

    def test_predict_rotates_body_accel(self):
        # Body +x accel with heading pi/2 pushes the world +y axis.
        ekf = PositionEkf((0.0, 0.0))
        ekf.predict((1.0, 0.0), math.pi / 2.0, 0.1)
        assert ekf.mean[3] == pytest.approx(0.1)
        assert abs(ekf.mean[2]) < 1e-12

    def test_predict_grows_uncertainty(self):
        ekf = PositionEkf((0.0, 0.0))
        before = np.trace(ekf.cov)
        ekf.predict((0.0, 0.0), 0.0, 0.01)
        assert np.trace(ekf.cov) > before


class TestUpdates:
    def test_flow_pulls_velocity(self):
        ekf = PositionEkf((0.0, 0.0), initial_vel_sigma=1.0)
        for _ in range(50):
            ekf.update_flow((0.5, 0.0), 0.0)
        assert ekf.velocity[0] == pytest.approx(0.5, abs=1e-3)

    def test_flow_heading_frame(self):
        ekf = PositionEkf((0.0, 0.0), initial_vel_sigma=1.0)
        for _ in range(50):
            ekf.update_flow((0.5, 0.0), math.pi / 2.0)
        assert ekf.velocity[1] == pytest.approx(0.5, abs=1e-3)
        assert abs(ekf.velocity[0]) < 1e-9

    def test_flow_reduces_velocity_uncertainty(self):
        ekf = PositionEkf((0.0, 0.0))
        before = ekf.cov[2, 2]
        ekf.update_flow((0.0, 0.0), 0.0)
        assert ekf.cov[2, 2] < before

    def test_range_update_moves_along_baseline(self):
        ekf = PositionEkf((1.0, 0.0), initial_pos_sigma=0.5)
        applied = ekf.update_range((0.0, 0.0), 1.5)
        assert applied
        assert ekf.position[0] > 1.0
        assert abs(ekf.position[1]) < 1e-9

    def test_range_gate_rejects_outlier(self):
        ekf = PositionEkf((1.0, 0.0))
        applied = ekf.update_range((0.0, 0.0), 3.5)
        assert not applied
        assert ekf.gate_count == 1
        assert ekf.position == (1.0, 0.0)

    def test_degenerate_peer_skipped(self):
        ekf = PositionEkf((1.0, 1.0))
        assert not ekf.update_range((1.0, 1.0), 0.5)
        assert ekf.degenerate_range_count == 1

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            PositionEkf((1.0, 0.0)).update_range((0.0, 0.0), 0.0)


class TestCovarianceHealth:
    def test_psd_after_many_random_operations(self):
        rng = random.Random(17)
        ekf = PositionEkf((3.0, 3.0))
        for _ in range(100_000):
            op = rng.random()
            if op < 0.5:
                ekf.predict(
                    (rng.uniform(-2, 2), rng.uniform(-2, 2)),
                    rng.uniform(-math.pi, math.pi),
                    0.01,
                )
            elif op < 0.8:
                ekf.update_flow((rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                                rng.uniform(-math.pi, math.pi))
            else:
                peer = (rng.uniform(0, 6.6), rng.uniform(0, 5.6))
                d = math.hypot(ekf.mean[0] - peer[0], ekf.mean[1] - peer[1])
                if d > 1e-6:
                    ekf.update_range(peer, max(d + rng.gauss(0, 0.1), 0.01))
        cov = ekf.cov
        assert np.allclose(cov, cov.T)
        assert _psd(cov)

    def test_symmetry_preserved(self):
        ekf = PositionEkf((0.0, 0.0))
        for _ in range(1000):
            ekf.predict((0.1, -0.1), 0.3, 0.01)
            ekf.update_flow((0.2, 0.0), 0.3)
        assert np.allclose(ekf.cov, ekf.cov.T, atol=1e-14)


class TestRangeJacobian:
    def test_matches_finite_differences(self):
        rng = random.Random(23)
        for _ in range(200):
            ekf = PositionEkf((rng.uniform(0, 6), rng.uniform(0, 5)))
            peer = (rng.uniform(0, 6), rng.uniform(0, 5))
            d = math.hypot(ekf.mean[0] - peer[0], ekf.mean[1] - peer[1])
            if d < 0.05:
                continue
            J = ekf.range_jacobian(peer)
            eps = 1e-6
            for i in range(4):
                x = ekf.mean.copy()
                x[i] += eps
                hp = math.hypot(x[0] - peer[0], x[1] - peer[1])
                x[i] -= 2 * eps
                hm = math.hypot(x[0] - peer[0], x[1] - peer[1])
                assert J[i] == pytest.approx((hp - hm) / (2 * eps), abs=1e-6)

    def test_undefined_at_peer(self):
        ekf = PositionEkf((2.0, 2.0))
        with pytest.raises(ValueError):
            ekf.range_jacobian((2.0, 2.0))

    def test_unit_norm(self):
        ekf = PositionEkf((1.0, 4.0))
        J = ekf.range_jacobian((3.0, 1.0))
        assert np.linalg.norm(J) == pytest.approx(1.0)


class TestTrilaterationOracle:
    def test_converges_to_nls_solution(self):
        # Repeated noiseless-range updates from 3 well-spread anchors should
        # land on the nonlinear least-squares position fix (scipy oracle).
        scipy_opt = pytest.importorskip("scipy.optimize")

        anchors = [(0.5, 0.5), (6.0, 0.8), (3.2, 5.0)]
        truth = np.array([2.4, 3.1])
        ranges = [float(np.linalg.norm(truth - a)) for a in anchors]

        ekf = PositionEkf((2.0, 2.5), initial_pos_sigma=1.0,
                          noise=NoiseConfig(range_meas_sigma=0.01))
        for _ in range(300):
            for a, r in zip(anchors, ranges):
                ekf.update_range(a, r)

        def residuals(p):
            return [np.linalg.norm(p - a) - r for a, r in zip(anchors, ranges)]

        fit = scipy_opt.least_squares(residuals, [2.0, 2.5]).x
        assert np.linalg.norm(fit - truth) < 1e-6
        assert math.hypot(ekf.position[0] - fit[0], ekf.position[1] - fit[1]) < 0.01

    def test_noisy_ranges_average_out(self):
        rng = random.Random(31)
        anchors = [(0.5, 0.5), (6.0, 0.8), (3.2, 5.0), (0.6, 5.2)]
        truth = (3.3, 2.2)
        ekf = PositionEkf((3.0, 2.0), initial_pos_sigma=0.5)
        for _ in range(500):
            for a in anchors:
                r = math.hypot(truth[0] - a[0], truth[1] - a[1]) + rng.gauss(0, 0.1)
                ekf.update_range(a, max(r, 0.01))
        assert math.hypot(ekf.position[0] - truth[0], ekf.position[1] - truth[1]) < 0.05
