import numpy as np
import pytest

from nrisac.radar import Measurement
from nrisac.tracker import (
    EkfState,
    KinState,
    ProcessNoise,
    beam_angles,
    initialize,
    jacobian,
    predict,
    state_transition,
    update,
)

DT = 0.125e-3
Q_TABLE = ProcessNoise(np.array([1e-3, 1e-3, 1e-3, 1e-5]))
SIGMA_MEAS = np.array([0.1, 0.2, 0.15, 1e-4])


def measurement(vec, sigmas=SIGMA_MEAS, valid=True):
    return Measurement(
        azimuth=float(vec[0]),
        distance=float(vec[1]),
        speed=float(vec[2]),
        reflection=complex(vec[3]),
        covariance=np.diag(np.asarray(sigmas) ** 2),
        velocity_valid=valid,
    )


def random_states(n, rng):
    for _ in range(n):
        yield KinState(
            azimuth=rng.uniform(-1.2, 1.2),
            distance=rng.uniform(5.0, 100.0),
            speed=rng.uniform(0.0, 40.0),
            reflection=rng.uniform(1e-4, 0.1),
        )


class TestStateTransition:
    def test_zero_speed_fixed_point(self):
        x = KinState(0.5, 30.0, 0.0, 0.01)
        assert state_transition(x, DT) == x

    def test_perpendicular_angle(self):
        x = KinState(np.pi / 2, 30.0, 20.0, 0.01)
        out = state_transition(x, 1.0)
        assert out.azimuth == pytest.approx(np.pi / 2)
        assert out.distance == pytest.approx(30.0 - 20.0)
        assert out.reflection == pytest.approx(0.01 * (1 - 20.0 / 30.0) ** 2)

    def test_broadside_angle(self):
        x = KinState(0.0, 30.0, 20.0, 0.01)
        out = state_transition(x, 1.0)
        assert out.distance == pytest.approx(30.0)
        assert out.azimuth == pytest.approx(-20.0 / 30.0)
        assert out.reflection == pytest.approx(0.01)

    def test_through_bs_rejected(self):
        x = KinState(np.pi / 2, 1.0, 20.0, 0.01)
        with pytest.raises(ValueError):
            state_transition(x, 1.0)


class TestJacobian:
    def test_zero_speed_structure(self):
        # substituting v=0: identity except the dt-proportional speed column
        x = KinState(0.4, 25.0, 0.0, 0.02)
        g = jacobian(x, DT)
        expected = np.eye(4)
        expected[0, 2] = -DT * np.cos(0.4) / 25.0
        expected[1, 2] = -DT * np.sin(0.4)
        expected[3, 2] = -2 * 0.02 * DT * np.sin(0.4) / 25.0
        np.testing.assert_allclose(g, expected, atol=1e-15)

    def test_zero_dt_identity(self):
        x = KinState(0.4, 25.0, 20.0, 0.02)
        np.testing.assert_allclose(jacobian(x, 0.0), np.eye(4), atol=1e-15)

    def test_matches_finite_differences(self):
        # oracle: central differences of an independent arbitrary-precision
        # reimplementation of the transition (some entries sit twelve orders
        # below the state values, beyond double-precision differencing)
        import mpmath

        mpmath.mp.dps = 40

        def transition_mp(vec):
            th, d, v, b = (mpmath.mpf(float(c)) for c in vec)
            dtm = mpmath.mpf(DT)
            ratio = v * dtm / d
            iota = 1 - ratio * mpmath.sin(th)
            return [
                th - ratio * mpmath.cos(th),
                d - v * dtm * mpmath.sin(th),
                v,
                b * iota**2,
            ]

        def fd_jacobian(vec):
            fd = np.zeros((4, 4))
            for j in range(4):
                h = mpmath.mpf(1e-8) * max(abs(float(vec[j])), 1.0)
                plus = [mpmath.mpf(float(c)) for c in vec]
                minus = list(plus)
                plus[j] += h
                minus[j] -= h
                fp, fm = transition_mp(plus), transition_mp(minus)
                for i in range(4):
                    fd[i, j] = float((fp[i] - fm[i]) / (2 * h))
            return fd

        rng = np.random.default_rng(17)
        for x in random_states(100, rng):
            g = jacobian(x, DT)
            fd = fd_jacobian(x.as_vector())
            nonzero = (np.abs(g) + np.abs(fd)) > 0
            scale = np.maximum(np.abs(g), np.abs(fd))
            err = np.where(nonzero, np.abs(g - fd) / np.where(nonzero, scale, 1.0), 0.0)
            assert err.max() < 1e-6


class TestPredict:
    def test_two_step_is_double_transition(self):
        x = KinState(0.5, 40.0, 20.0, 0.01)
        ekf = initialize(measurement(x.as_vector()))
        out = predict(ekf, Q_TABLE, DT)
        assert out.one_step == state_transition(x, DT)
        assert out.two_step == state_transition(state_transition(x, DT), DT)

    def test_mse_propagation_zero_speed(self):
        x = KinState(0.5, 40.0, 0.0, 0.01)
        m0 = np.diag([0.1, 0.2, 0.3, 0.4])
        ekf = EkfState(estimate=x, mse=m0, one_step=x, two_step=x, rx_azimuth=x.azimuth)
        out = predict(ekf, Q_TABLE, DT)
        g = jacobian(x, DT)
        np.testing.assert_allclose(out.mse, g @ m0 @ g.T + Q_TABLE.covariance, atol=1e-15)

    def test_dominant_process_noise(self):
        x = KinState(0.5, 40.0, 20.0, 0.01)
        ekf = EkfState(estimate=x, mse=np.zeros((4, 4)), one_step=x, two_step=x,
                       rx_azimuth=x.azimuth)
        out = predict(ekf, Q_TABLE, DT)
        np.testing.assert_allclose(out.mse, Q_TABLE.covariance, rtol=1e-6)


class TestUpdate:
    def setup_ekf(self):
        x = KinState(0.5, 40.0, 20.0, 0.01)
        ekf = initialize(measurement(x.as_vector()))
        return predict(ekf, Q_TABLE, DT)

    def test_zero_innovation_keeps_prediction(self):
        ekf = self.setup_ekf()
        y = measurement(ekf.one_step.as_vector())
        out = update(ekf, y)
        np.testing.assert_allclose(out.estimate.as_vector(), ekf.one_step.as_vector(), atol=1e-12)

    def test_tiny_measurement_noise_trusts_measurement(self):
        ekf = self.setup_ekf()
        target = ekf.one_step.as_vector() + np.array([0.05, 1.0, -2.0, 0.001])
        y = measurement(target, sigmas=[1e-9, 1e-9, 1e-9, 1e-12])
        out = update(ekf, y)
        np.testing.assert_allclose(out.estimate.as_vector(), target, rtol=1e-6)
        assert np.all(np.abs(np.diag(out.mse)) < 1e-9)

    def test_huge_measurement_noise_keeps_prediction(self):
        ekf = self.setup_ekf()
        target = ekf.one_step.as_vector() + np.array([0.05, 1.0, -2.0, 0.001])
        y = measurement(target, sigmas=[1e6, 1e6, 1e6, 1e6])
        out = update(ekf, y)
        np.testing.assert_allclose(out.estimate.as_vector(), ekf.one_step.as_vector(), atol=1e-6)

    def test_invalid_velocity_passthrough(self):
        ekf = self.setup_ekf()
        target = ekf.one_step.as_vector() + np.array([0.0, 0.0, -5.0, 0.0])
        y = measurement(target, valid=False)
        out = update(ekf, y)
        assert out.estimate.speed == pytest.approx(ekf.one_step.speed, abs=1e-6)

    def test_uncertainty_strictly_decreases(self):
        ekf = self.setup_ekf()
        y = measurement(ekf.one_step.as_vector() + 0.01)
        out = update(ekf, y)
        assert np.all(np.diag(out.mse) < np.diag(ekf.mse))


class TestBeamBookkeeping:
    def test_initialization_angles(self):
        y = measurement([0.7, 40.0, 20.0, 0.01])
        ekf = initialize(y)
        tx, rx = beam_angles(ekf)
        assert tx == rx == pytest.approx(0.7)

    def test_rx_angle_is_previous_two_step(self):
        y = measurement([0.7, 40.0, 20.0, 0.01])
        ekf = initialize(y)
        first = predict(ekf, Q_TABLE, DT)
        first_two_step = first.two_step.azimuth
        updated = update(first, measurement(first.one_step.as_vector()))
        second = predict(updated, Q_TABLE, DT)
        assert beam_angles(second)[1] == pytest.approx(first_two_step)

    def test_converged_beams_point_at_stationary_truth(self):
        # v = 0 truth is a fixed point; both beam angles settle on it
        rng = np.random.default_rng(23)
        truth = KinState(0.62, 35.0, 0.0, 0.05)
        ekf = None
        for _ in range(500):
            y = measurement(truth.as_vector() + rng.normal(scale=SIGMA_MEAS))
            if ekf is None:
                ekf = initialize(y)
            else:
                ekf = predict(ekf, Q_TABLE, DT)
                ekf = update(ekf, y)
        ekf = predict(ekf, Q_TABLE, DT)
        tx, rx = beam_angles(ekf)
        assert abs(tx - truth.azimuth) < 0.02
        assert abs(rx - truth.azimuth) < 0.02

    def test_initialize_scale(self):
        y = measurement([0.7, 40.0, 20.0, 0.01])
        ekf = initialize(y, init_mse_scale=10.0)
        np.testing.assert_allclose(ekf.mse, 10.0 * y.covariance)
        ekf0 = initialize(y, init_mse_scale=0.0)
        np.testing.assert_allclose(ekf0.mse, np.zeros((4, 4)))
        assert ekf0.estimate.as_vector() == pytest.approx([0.7, 40.0, 20.0, 0.01])


def synthetic_run(n_slots, rng, q=Q_TABLE.sigmas, r=SIGMA_MEAS, x0=None):
    """Generate truth with the transition model plus process noise, then filter."""
    truth = x0 or KinState(0.9, 47.0, 20.0, 0.0113)
    process = ProcessNoise(np.asarray(q))
    truths, meas, estimates, nis = [], [], [], []
    ekf = None
    for _ in range(n_slots):
        y_vec = truth.as_vector() + rng.normal(scale=r)
        y = measurement(y_vec, sigmas=r)
        if ekf is None:
            ekf = initialize(y)
        else:
            ekf = predict(ekf, process, DT)
            innov = y_vec - ekf.one_step.as_vector()
            s = ekf.mse + y.covariance
            nis.append(float(innov @ np.linalg.solve(s, innov)))
            ekf = update(ekf, y)
        truths.append(truth)
        meas.append(y_vec)
        estimates.append(ekf.estimate)
        noise = rng.normal(scale=np.asarray(q))
        stepped = state_transition(truth, DT).as_vector() + noise
        truth = KinState.from_vector(stepped)
    return truths, meas, estimates, nis


class TestFilterBehavior:
    def test_mse_stays_symmetric_psd(self):
        rng = np.random.default_rng(18)
        truth = KinState(0.9, 47.0, 20.0, 0.0113)
        process = ProcessNoise(np.array([1e-3, 1e-3, 1e-3, 1e-5]))
        ekf = initialize(measurement(truth.as_vector()))
        for i in range(10_000):
            ekf = predict(ekf, process, DT)
            y = measurement(ekf.one_step.as_vector() + rng.normal(scale=SIGMA_MEAS))
            ekf = update(ekf, y)
            if i % 100 == 0:
                assert np.max(np.abs(ekf.mse - ekf.mse.T)) < 1e-9
                assert np.min(np.linalg.eigvalsh(ekf.mse)) > -1e-10

    def test_innovation_consistency_chi_square(self):
        # matched noise: normalized innovation squared near the 4-DoF mean
        rng = np.random.default_rng(19)
        _, _, _, nis = synthetic_run(4000, rng)
        avg = float(np.mean(nis))
        assert 2.0 < avg < 6.0

    def test_filter_beats_raw_measurements(self):
        # azimuth RMSE of the filtered estimate under matched noise stays
        # below both the sigma of the measurements and their empirical RMSE
        rng = np.random.default_rng(20)
        filt_rmse, meas_rmse = [], []
        for _ in range(50):
            truths, meas, estimates, _ = synthetic_run(400, rng)
            t = np.array([s.azimuth for s in truths[50:]])
            m = np.array([v[0] for v in meas[50:]])
            e = np.array([s.azimuth for s in estimates[50:]])
            filt_rmse.append(np.sqrt(np.mean((e - t) ** 2)))
            meas_rmse.append(np.sqrt(np.mean((m - t) ** 2)))
        filt_rmse, meas_rmse = np.array(filt_rmse), np.array(meas_rmse)
        assert np.mean(filt_rmse) < 0.1
        diff = meas_rmse - filt_rmse
        # one-sided 95% confidence that the filter is strictly better
        assert np.mean(diff) - 1.645 * np.std(diff, ddof=1) / np.sqrt(len(diff)) > 0
