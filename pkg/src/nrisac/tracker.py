"""Extended Kalman filter over the kinematic state (azimuth, range, speed, beta).

State evolution over one slot of duration dT (iota = 1 - v dT sin(th) / d):

    th' = th - v dT cos(th) / d
    d'  = d - v dT sin(th)
    v'  = v
    b'  = b * iota^2

The observation matrix is the identity: the radar pipeline measures all four
state components directly.  Beta is tracked as a real magnitude; the measured
reflection phase is discarded.

Beam pointing uses two prediction horizons: the transmit beam at slot n takes
the one-step-ahead azimuth computed at slot n, while the vehicle's receive
beam takes the two-step-ahead azimuth computed at slot n-1 (it was shipped to
the vehicle one slot in advance).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .radar import Measurement

# measurement variance standing in for "infinite" when a component is invalid
_HUGE_VAR = 1e12


@dataclass(frozen=True)
class KinState:
    """Kinematic state: azimuth (rad), distance (m), speed (m/s), beta magnitude."""

    azimuth: float
    distance: float
    speed: float
    reflection: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.azimuth, self.distance, self.speed, self.reflection])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "KinState":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


@dataclass(frozen=True)
class ProcessNoise:
    """Diagonal process-noise standard deviations (sigma_th, sigma_d, sigma_v, sigma_b)."""

    sigmas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigmas", np.asarray(self.sigmas, dtype=float))
        if self.sigmas.shape != (4,) or np.any(self.sigmas <= 0):
            raise ValueError("process noise needs 4 positive sigmas")

    @property
    def covariance(self) -> np.ndarray:
        return np.diag(self.sigmas**2)


@dataclass(frozen=True)
class EkfState:
    """Filter memory between slots.

    ``estimate``/``mse`` hold the latest posterior; ``one_step``/``two_step``
    the predictions g(x) and g(g(x)) from the most recent predict call; and
    ``rx_azimuth`` the two-step azimuth produced one slot earlier, which is
    what the vehicle's receive beam uses now.
    """

    estimate: KinState
    mse: np.ndarray           # 4x4 symmetric PSD
    one_step: KinState
    two_step: KinState
    rx_azimuth: float


def state_transition(x: KinState, dt: float) -> KinState:
    """Propagate the state one interval with the constant-speed road model."""
    if x.distance <= 0:
        raise ValueError("distance must be positive")
    ratio = x.speed * dt / x.distance
    d_new = x.distance - x.speed * dt * np.sin(x.azimuth)
    if d_new <= 0:
        raise ValueError("state propagated through the BS (nonpositive distance)")
    iota = 1.0 - ratio * np.sin(x.azimuth)
    return KinState(
        azimuth=x.azimuth - ratio * np.cos(x.azimuth),
        distance=d_new,
        speed=x.speed,
        reflection=x.reflection * iota**2,
    )


def jacobian(x: KinState, dt: float) -> np.ndarray:
    """4x4 derivative of the state transition, evaluated at x."""
    if x.distance <= 0:
        raise ValueError("distance must be positive")
    th, d, v, b = x.azimuth, x.distance, x.speed, x.reflection
    sin, cos = np.sin(th), np.cos(th)
    iota = 1.0 - v * dt * sin / d
    return np.array(
        [
            [1.0 + v * dt * sin / d, v * dt * cos / d**2, -dt * cos / d, 0.0],
            [-v * dt * cos, 1.0, -dt * sin, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [
                -2.0 * b * v * dt * cos / d * iota,
                2.0 * b * v * dt * sin / d**2 * iota,
                -2.0 * b * dt * sin / d * iota,
                iota**2,
            ],
        ]
    )


def initialize(first: Measurement, init_mse_scale: float = 10.0) -> EkfState:
    """Start the filter on the first measurement with an inflated covariance."""
    x0 = KinState(first.azimuth, first.distance, first.speed, abs(first.reflection))
    return EkfState(
        estimate=x0,
        mse=init_mse_scale * first.covariance.copy(),
        one_step=x0,
        two_step=x0,
        rx_azimuth=x0.azimuth,
    )


def predict(ekf: EkfState, noise: ProcessNoise, dt: float) -> EkfState:
    """One- and two-step state prediction plus MSE propagation.

    Runs at the start of each slot: the new one-step azimuth steers the
    transmit beam now, the previous two-step azimuth becomes the vehicle's
    receive pointing, and the new two-step is queued for the next slot.
    """
    one = state_transition(ekf.estimate, dt)
    two = state_transition(one, dt)
    g = jacobian(ekf.estimate, dt)
    mse = g @ ekf.mse @ g.T + noise.covariance
    return EkfState(
        estimate=ekf.estimate,
        mse=0.5 * (mse + mse.T),
        one_step=one,
        two_step=two,
        rx_azimuth=ekf.two_step.azimuth,
    )


def update(ekf: EkfState, y: Measurement) -> EkfState:
    """Measurement update with identity observation matrix.

    When the measurement's velocity component is flagged invalid (near
    broadside-perpendicular geometry) its variance is raised to an
    effectively infinite value, so the speed passes through from the
    prediction.
    """
    q_m = y.covariance.copy()
    if not y.velocity_valid:
        q_m[2, 2] = _HUGE_VAR
    prior = ekf.one_step.as_vector()
    m_pred = ekf.mse
    innovation_cov = q_m + m_pred
    gain = m_pred @ np.linalg.inv(innovation_cov)
    y_vec = np.array([y.azimuth, y.distance, y.speed, abs(y.reflection)])
    x_new = prior + gain @ (y_vec - prior)
    m_new = (np.eye(4) - gain) @ m_pred
    m_new = 0.5 * (m_new + m_new.T)
    return replace(ekf, estimate=KinState.from_vector(x_new), mse=m_new)


def beam_angles(ekf: EkfState) -> tuple[float, float]:
    """(transmit azimuth, vehicle receive azimuth) for the current slot."""
    return ekf.one_step.azimuth, ekf.rx_azimuth
