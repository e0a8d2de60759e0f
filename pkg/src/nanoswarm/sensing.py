"""Per-tick sensor models: four-zone ToF beams, vision-proxy collision score,
and noisy ego-motion (optical flow + accelerometer)."""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .agents import AgentBody, wrap_angle
from .world import Arena, _ray_disc

TOF_MAX_RANGE = 4.0
TOF_MIN_RANGE = 0.01
TOF_RATE_HZ = 20.0
EGO_RATE_HZ = 100.0

ZONES = ("front", "back", "left", "right")
ZONE_OFFSETS = {
    "front": 0.0,
    "back": math.pi,
    "right": -math.pi / 2.0,
    "left": math.pi / 2.0,
}


@dataclass
class SensorNoise:
    """Noise calibration for ToF and ego-motion channels (config-exposed)."""

    tof_sigma: float = 0.02           # m
    tof_jitter_sigma: float = math.radians(2.0)
    flow_sigma: float = 0.05          # m/s
    accel_sigma: float = 0.1          # m/s^2


@dataclass(frozen=True)
class TofReading:
    zone: str
    distance: float
    time: float


@dataclass(frozen=True)
class VisionScore:
    probability: float
    frame_time: float


@dataclass
class VisionProxyParams:
    """Parametric stand-in for the onboard collision-probability CNN."""

    fov: float = 1.13                 # rad, ~65 deg horizontal
    d0: float = 1.5                   # m, logistic midpoint distance
    slope: float = 0.3                # m, logistic scale
    noise_sigma: float = 0.05
    false_positive_floor: float = 0.02

    def __post_init__(self):
        if not 0.0 < self.fov < math.pi:
            raise ValueError("fov must be in (0, pi)")
        if self.slope <= 0.0:
            raise ValueError("slope must be > 0")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class EgoMotionSample:
    flow_velocity: Tuple[float, float]   # body frame, m/s
    acceleration: Tuple[float, float]    # body frame, m/s^2
    time: float


def _raycast_with_agents(
    arena: Arena, bodies: Sequence[AgentBody], agent: AgentBody,
    ox: float, oy: float, dx: float, dy: float, max_range: float,
) -> float:
    d = arena.raycast((ox, oy), (dx, dy), max_range)
    for other in bodies:
        if other.id == agent.id:
            continue
        t = _ray_disc(ox, oy, dx, dy, other.x, other.y, other.footprint_radius)
        if t < d:
            d = t
    return d


def sample_tof(
    arena: Arena,
    bodies: Sequence[AgentBody],
    agent: AgentBody,
    zone: str,
    rng,
    noise: Optional[SensorNoise] = None,
    time: float = 0.0,
) -> TofReading:
    """One single-beam ToF measurement for a zone.

    The beam direction is the zone axis perturbed by Gaussian yaw jitter; thin
    obstacles are hit only when the jittered ray actually intersects their
    disc, which is what makes narrow clutter intermittently invisible to ToF.
    """
    noise = noise or SensorNoise()
    angle = agent.heading + ZONE_OFFSETS[zone]
    if noise.tof_jitter_sigma > 0.0:
        angle += rng.gauss(0.0, noise.tof_jitter_sigma)
    d = _raycast_with_agents(
        arena, bodies, agent, agent.x, agent.y,
        math.cos(angle), math.sin(angle), TOF_MAX_RANGE,
    )
    if noise.tof_sigma > 0.0:
        d += rng.gauss(0.0, noise.tof_sigma)
    d = min(max(d, TOF_MIN_RANGE), TOF_MAX_RANGE)
    return TofReading(zone, d, time)


def _logistic(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _fov_distance_disc(px, py, heading, half_fov, cx, cy, r) -> float:
    """Min distance from (px, py) to the part of a disc within the FOV cone."""
    dx, dy = cx - px, cy - py
    dist = math.hypot(dx, dy)
    bearing = wrap_angle(math.atan2(dy, dx) - heading)
    if abs(bearing) <= half_fov:
        return max(dist - r, 0.0)
    best = math.inf
    for edge in (heading - half_fov, heading + half_fov):
        t = _ray_disc(px, py, math.cos(edge), math.sin(edge), cx, cy, r)
        if t < best:
            best = t
    return best


def _fov_distance_segment(px, py, heading, half_fov, ax, ay, bx, by) -> float:
    """Min distance from (px, py) to the part of a segment within the FOV cone."""
    candidates: List[float] = []
    ex, ey = bx - ax, by - ay
    denom = ex * ex + ey * ey
    t = ((px - ax) * ex + (py - ay) * ey) / denom
    t = min(max(t, 0.0), 1.0)
    for qx, qy in ((ax + t * ex, ay + t * ey), (ax, ay), (bx, by)):
        dx, dy = qx - px, qy - py
        if abs(wrap_angle(math.atan2(dy, dx) - heading)) <= half_fov:
            candidates.append(math.hypot(dx, dy))
    from .world import _ray_segment
    for edge in (heading - half_fov, heading + half_fov):
        d = _ray_segment(px, py, math.cos(edge), math.sin(edge), ax, ay, bx, by)
        if math.isfinite(d):
            candidates.append(d)
    return min(candidates) if candidates else math.inf


def fov_obstacle_distance(
    arena: Arena, bodies: Sequence[AgentBody], agent: AgentBody, fov: float
) -> float:
    """Distance to the nearest obstacle/wall/peer within the camera FOV (inf if none)."""
    half = fov / 2.0
    px, py, heading = agent.x, agent.y, agent.heading
    best = math.inf
    for ax, ay, bx, by in arena._segs:
        d = _fov_distance_segment(px, py, heading, half, ax, ay, bx, by)
        if d < best:
            best = d
    for cx, cy, r in arena._discs:
        d = _fov_distance_disc(px, py, heading, half, cx, cy, r)
        if d < best:
            best = d
    for other in bodies:
        if other.id == agent.id:
            continue
        d = _fov_distance_disc(px, py, heading, half, other.x, other.y, other.footprint_radius)
        if d < best:
            best = d
    return best


def sample_vision(
    arena: Arena,
    bodies: Sequence[AgentBody],
    agent: AgentBody,
    params: VisionProxyParams,
    rng,
    frame_time: float = 0.0,
) -> VisionScore:
    """Collision-probability score for one camera frame.

    Unlike the ToF beams, the proxy sees thin obstacles at any bearing inside
    the FOV: wide field of view and semantic detection are what the camera
    contributes to the sensor suite.
    """
    d = fov_obstacle_distance(arena, bodies, agent, params.fov)
    p = _logistic((params.d0 - d) / params.slope) if math.isfinite(d) else 0.0
    if params.noise_sigma > 0.0:
        p += rng.gauss(0.0, params.noise_sigma)
    p = min(max(p, params.false_positive_floor), 1.0)
    return VisionScore(p, frame_time)


def sample_ego_motion(
    body: AgentBody,
    rng,
    noise: Optional[SensorNoise] = None,
    time: float = 0.0,
) -> EgoMotionSample:
    """Body-frame velocity (optical flow) and acceleration, with Gaussian noise."""
    noise = noise or SensorNoise()
    c, s = math.cos(body.heading), math.sin(body.heading)
    # world -> body rotation
    fx = c * body.vx + s * body.vy
    fy = -s * body.vx + c * body.vy
    gx = c * body.ax + s * body.ay
    gy = -s * body.ax + c * body.ay
    if noise.flow_sigma > 0.0:
        fx += rng.gauss(0.0, noise.flow_sigma)
        fy += rng.gauss(0.0, noise.flow_sigma)
    if noise.accel_sigma > 0.0:
        gx += rng.gauss(0.0, noise.accel_sigma)
        gy += rng.gauss(0.0, noise.accel_sigma)
    return EgoMotionSample((fx, fy), (gx, gy), time)
