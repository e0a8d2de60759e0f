"""Per-agent Kalman filter fusing ego-motion and UWB peer ranges into a
position estimate in the shared take-off frame."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

INNOVATION_GATE = 5.0  # in standard deviations


@dataclass
class NoiseConfig:
    process_accel_sigma: float = 0.2   # m/s^2
    flow_meas_sigma: float = 0.05      # m/s
    range_meas_sigma: float = 0.10     # m

    def __post_init__(self):
        for name in ("process_accel_sigma", "flow_meas_sigma", "range_meas_sigma"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")


class PositionEkf:
    """EKF over [x, y, vx, vy]; heading is supplied by the flight controller.

    Measurement updates use the Joseph form to keep the covariance PSD.
    Range updates are linearized about the current estimate and gated at
    5 sigma of the innovation variance.
    """

    def __init__(
        self,
        takeoff_position: Tuple[float, float],
        noise: Optional[NoiseConfig] = None,
        time: float = 0.0,
        initial_pos_sigma: float = 0.01,
        initial_vel_sigma: float = 0.01,
    ):
        self.noise = noise or NoiseConfig()
        self.mean = np.array(
            [takeoff_position[0], takeoff_position[1], 0.0, 0.0], dtype=float
        )
        self.cov = np.diag(
            [initial_pos_sigma**2, initial_pos_sigma**2,
             initial_vel_sigma**2, initial_vel_sigma**2]
        )
        self.time = time
        self.gate_count = 0
        self.degenerate_range_count = 0
        self._fq_cache: Tuple[float, np.ndarray, np.ndarray] = (-1.0, None, None)

    @property
    def position(self) -> Tuple[float, float]:
        return (float(self.mean[0]), float(self.mean[1]))

    @property
    def velocity(self) -> Tuple[float, float]:
        return (float(self.mean[2]), float(self.mean[3]))

    def _transition(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        if self._fq_cache[0] == dt:
            return self._fq_cache[1], self._fq_cache[2]
        F = np.eye(4)
        F[0, 2] = dt
        F[1, 3] = dt
        q = self.noise.process_accel_sigma**2
        q11 = q * dt**4 / 4.0
        q12 = q * dt**3 / 2.0
        q22 = q * dt**2
        Q = np.array(
            [
                [q11, 0.0, q12, 0.0],
                [0.0, q11, 0.0, q12],
                [q12, 0.0, q22, 0.0],
                [0.0, q12, 0.0, q22],
            ]
        )
        self._fq_cache = (dt, F, Q)
        return F, Q

    def predict(self, accel_body: Tuple[float, float], heading: float, dt: float) -> None:
        """Propagate with the constant-velocity + acceleration-input model."""
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        c, s = math.cos(heading), math.sin(heading)
        ax = c * accel_body[0] - s * accel_body[1]
        ay = s * accel_body[0] + c * accel_body[1]
        m = self.mean
        m[0] += m[2] * dt + 0.5 * ax * dt * dt
        m[1] += m[3] * dt + 0.5 * ay * dt * dt
        m[2] += ax * dt
        m[3] += ay * dt
        F, Q = self._transition(dt)
        self.cov = F @ self.cov @ F.T + Q
        self.time += dt

    def _joseph_update(self, H: np.ndarray, R: np.ndarray, innovation: np.ndarray) -> None:
        P = self.cov
        S = H @ P @ H.T + R
        K = P @ H.T @ np.linalg.inv(S)
        self.mean = self.mean + K @ innovation
        ikh = np.eye(4) - K @ H
        self.cov = ikh @ P @ ikh.T + K @ R @ K.T

    def update_flow(self, flow_body: Tuple[float, float], heading: float) -> None:
        """Linear velocity update from the optical flow sensor (body frame)."""
        c, s = math.cos(heading), math.sin(heading)
        vx = c * flow_body[0] - s * flow_body[1]
        vy = s * flow_body[0] + c * flow_body[1]
        H = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
        R = np.eye(2) * self.noise.flow_meas_sigma**2
        innovation = np.array([vx - self.mean[2], vy - self.mean[3]])
        self._joseph_update(H, R, innovation)

    def update_range(
        self, peer_position: Tuple[float, float], measured_range: float
    ) -> bool:
        """First-order range update against a peer's broadcast estimate.

        Returns True if the update was applied, False if it was skipped
        (gated innovation or degenerate geometry).
        """
        if measured_range <= 0.0:
            raise ValueError("measured_range must be > 0")
        dx = self.mean[0] - peer_position[0]
        dy = self.mean[1] - peer_position[1]
        predicted = math.hypot(dx, dy)
        if predicted < 1e-9:
            self.degenerate_range_count += 1
            return False
        ux, uy = dx / predicted, dy / predicted
        H = np.array([[ux, uy, 0.0, 0.0]])
        R = np.array([[self.noise.range_meas_sigma**2]])
        innovation = measured_range - predicted
        S = float((H @ self.cov @ H.T + R)[0, 0])
        if abs(innovation) > INNOVATION_GATE * math.sqrt(S):
            self.gate_count += 1
            return False
        self._joseph_update(H, R, np.array([innovation]))
        return True

    def range_jacobian(self, peer_position: Tuple[float, float]) -> np.ndarray:
        """Jacobian of the range measurement h(x) = ||pos - peer|| at the mean."""
        dx = self.mean[0] - peer_position[0]
        dy = self.mean[1] - peer_position[1]
        d = math.hypot(dx, dy)
        if d < 1e-9:
            raise ValueError("range gradient undefined at peer position")
        return np.array([dx / d, dy / d, 0.0, 0.0])
