"""Per-drone kinematics, motion command integration, and crash bookkeeping."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from .world import Arena

V_MAX = 0.5            # m/s, mission cruise speed
OMEGA_MAX = math.pi    # rad/s yaw rate while rotating in place
ACCEL_SLEW = 2.0       # m/s^2 linear speed slew
FOOTPRINT_RADIUS = 0.05
ALTITUDE = 0.3         # metadata only; all geometry is planar
LATERAL_DISTANCE = 0.3


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass
class MotionCommand:
    """One policy output; mutable progress fields track multi-tick execution."""

    kind: str  # cruise | stop | rotate | lateral
    delta: float = 0.0          # rotate: signed angle still to turn (rad)
    direction: str = ""         # lateral: "left" | "right"
    distance: float = 0.0       # lateral: distance still to travel (m)

    @staticmethod
    def cruise() -> "MotionCommand":
        return MotionCommand("cruise")

    @staticmethod
    def stop() -> "MotionCommand":
        return MotionCommand("stop")

    @staticmethod
    def rotate(delta: float) -> "MotionCommand":
        if not -2.0 * math.pi <= delta <= 2.0 * math.pi:
            raise ValueError("rotate delta must be within [-2pi, 2pi]")
        return MotionCommand("rotate", delta=delta)

    @staticmethod
    def lateral(direction: str, distance: float = LATERAL_DISTANCE) -> "MotionCommand":
        if direction not in ("left", "right"):
            raise ValueError("lateral direction must be 'left' or 'right'")
        if distance <= 0.0:
            raise ValueError("lateral distance must be > 0")
        return MotionCommand("lateral", direction=direction, distance=distance)

    def describe(self) -> str:
        if self.kind == "rotate":
            return f"rotate({math.degrees(self.delta):.1f}deg)"
        if self.kind == "lateral":
            return f"lateral({self.direction},{self.distance:.2f}m)"
        return self.kind


@dataclass
class AgentBody:
    """Kinematic state of one drone (planar; altitude carried as metadata)."""

    id: int
    x: float
    y: float
    heading: float
    vx: float = 0.0
    vy: float = 0.0
    ax: float = 0.0  # world-frame acceleration realized over the last tick
    ay: float = 0.0
    footprint_radius: float = FOOTPRINT_RADIUS
    altitude: float = ALTITUDE

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def slew_velocity(vx, vy, tx, ty, dt) -> Tuple[float, float]:
    """Move (vx, vy) toward target (tx, ty), rate-limited by ACCEL_SLEW."""
    dx, dy = tx - vx, ty - vy
    gap = math.hypot(dx, dy)
    step = ACCEL_SLEW * dt
    if gap <= step:
        return tx, ty
    s = step / gap
    return vx + dx * s, vy + dy * s


def target_velocity(body: AgentBody, command: MotionCommand) -> Tuple[float, float]:
    """Velocity setpoint the slew controller is driving toward."""
    if command.kind == "cruise":
        return V_MAX * math.cos(body.heading), V_MAX * math.sin(body.heading)
    if command.kind == "lateral":
        side = math.pi / 2.0 if command.direction == "left" else -math.pi / 2.0
        return V_MAX * math.cos(body.heading + side), V_MAX * math.sin(body.heading + side)
    return 0.0, 0.0  # stop and rotate both drive the linear speed to zero


def integrate(body: AgentBody, command: MotionCommand, dt: float) -> Tuple[AgentBody, bool]:
    """Advance one tick under a motion command (in place).

    Returns (body, done) where done means the command finished this tick
    (rotate/lateral only; cruise and stop never complete on their own).
    Position uses the trapezoid rule so the realized (velocity, acceleration)
    pair exactly reproduces the displacement when re-integrated downstream.
    Rotation waits for the linear speed to slew to zero before yawing.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    vx0, vy0 = body.vx, body.vy
    done = False

    if command.kind == "cruise":
        tx = V_MAX * math.cos(body.heading)
        ty = V_MAX * math.sin(body.heading)
        body.vx, body.vy = slew_velocity(vx0, vy0, tx, ty, dt)
    elif command.kind == "stop":
        body.vx, body.vy = slew_velocity(vx0, vy0, 0.0, 0.0, dt)
    elif command.kind == "rotate":
        body.vx, body.vy = slew_velocity(vx0, vy0, 0.0, 0.0, dt)
        if body.vx == 0.0 and body.vy == 0.0:
            step = OMEGA_MAX * dt
            if abs(command.delta) <= step:
                body.heading = wrap_angle(body.heading + command.delta)
                command.delta = 0.0
                done = True
            else:
                sign = 1.0 if command.delta > 0.0 else -1.0
                body.heading = wrap_angle(body.heading + sign * step)
                command.delta -= sign * step
    elif command.kind == "lateral":
        side = math.pi / 2.0 if command.direction == "left" else -math.pi / 2.0
        px = math.cos(body.heading + side)
        py = math.sin(body.heading + side)
        body.vx, body.vy = slew_velocity(vx0, vy0, V_MAX * px, V_MAX * py, dt)
        moved = ((vx0 + body.vx) * px + (vy0 + body.vy) * py) * 0.5 * dt
        if moved > 0.0:
            command.distance -= moved
            if command.distance <= 0.0:
                command.distance = 0.0
                done = True
    else:
        raise ValueError(f"unknown command kind {command.kind!r}")

    body.x += (vx0 + body.vx) * 0.5 * dt
    body.y += (vy0 + body.vy) * 0.5 * dt
    body.ax = (body.vx - vx0) / dt
    body.ay = (body.vy - vy0) / dt
    # Never leave the arena: the caller clips against walls via crash handling,
    # but numerical overshoot past a wall is clamped here.
    return body, done


@dataclass(frozen=True)
class CrashEvent:
    time: float
    agent: int
    position: Tuple[float, float]
    obstacle: Union[int, str]  # obstacle index, negative wall index, or "agent:<id>"


def overlaps(bodies: List[AgentBody], arena: Arena) -> List[Tuple[int, Union[int, str]]]:
    """Current footprint overlaps: (agent id, obstacle ref) pairs, no dedup."""
    out: List[Tuple[int, Union[int, str]]] = []
    for b in bodies:
        if arena.min_clearance((b.x, b.y), b.footprint_radius) < 0.0:
            out.append((b.id, arena.nearest_obstacle_index((b.x, b.y))))
    n = len(bodies)
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = bodies[i], bodies[j]
            if math.hypot(bi.x - bj.x, bi.y - bj.y) < bi.footprint_radius + bj.footprint_radius:
                out.append((bi.id, f"agent:{bj.id}"))
    return out


class CrashTracker:
    """Deduplicates overlap events: one CrashEvent per contiguous overlap interval."""

    def __init__(self):
        self._active: set = set()

    def update(self, bodies: List[AgentBody], arena: Arena, time: float) -> List[CrashEvent]:
        events: List[CrashEvent] = []
        current = set()
        by_id = {b.id: b for b in bodies}
        for agent_id, obstacle in overlaps(bodies, arena):
            key = (agent_id, obstacle)
            current.add(key)
            if key not in self._active:
                b = by_id[agent_id]
                events.append(CrashEvent(time, agent_id, (b.x, b.y), obstacle))
        self._active = current
        return events


def detect_crashes(bodies: List[AgentBody], arena: Arena, time: float) -> List[CrashEvent]:
    """Stateless snapshot of crash events at one instant (no interval dedup)."""
    by_id = {b.id: b for b in bodies}
    return [
        CrashEvent(time, agent_id, (by_id[agent_id].x, by_id[agent_id].y), obstacle)
        for agent_id, obstacle in overlaps(bodies, arena)
    ]
