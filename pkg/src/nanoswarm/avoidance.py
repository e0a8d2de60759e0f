"""Collision-avoidance logic: OCA debouncing, ISCA critical-distance checks,
and the exploration-policy state machine."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .agents import MotionCommand, slew_velocity, wrap_angle
from .sensing import TofReading, VisionScore
from .uwbnet import PositionBeacon

TOF_TRIGGER_THRESHOLD = 1.0      # m
TOF_TRIGGER_COUNT = 5
VISION_TRIGGER_THRESHOLD = 0.7
VISION_TRIGGER_COUNT = 2
ISCA_CRITICAL_DISTANCE = 0.65    # m
ISCA_BEACON_STALENESS = 0.5      # s

ZONES = ("front", "back", "left", "right")

# Policy modes
CRUISE = "CRUISE"
ROTATE_RANDOM = "ROTATE_RANDOM"
ROTATE_FORCED_90 = "ROTATE_FORCED_90"
LATERAL_SHIFT = "LATERAL_SHIFT"
STOPPED = "STOPPED"

ROTATE_MIN_DEG = 90.0
ROTATE_MAX_DEG = 270.0
FORCED_ROTATE_DELTA = math.pi / 2.0  # always counter-clockwise


@dataclass
class ZoneFlags:
    front: bool = False
    back: bool = False
    left: bool = False
    right: bool = False
    sources: Dict[str, str] = field(default_factory=dict)  # zone -> tof|vision|isca

    def set(self, zone: str, source: str) -> None:
        if source == "vision" and zone != "front":
            raise ValueError("vision may only flag the front zone")
        setattr(self, zone, True)
        self.sources.setdefault(zone, source)

    def any(self) -> bool:
        return self.front or self.back or self.left or self.right


class OcaState:
    """Debounce counters for the ToF and vision trigger rules.

    A zone triggers after TOF_TRIGGER_COUNT consecutive readings below the
    1 m threshold; vision triggers after VISION_TRIGGER_COUNT consecutive
    frames strictly above 0.7. Counters reset after a trigger.
    """

    def __init__(
        self,
        tof_threshold: float = TOF_TRIGGER_THRESHOLD,
        vision_threshold: float = VISION_TRIGGER_THRESHOLD,
    ):
        self.tof_threshold = tof_threshold
        self.vision_threshold = vision_threshold
        self.tof_counters: Dict[str, int] = {z: 0 for z in ZONES}
        self.vision_counter = 0

    def ingest_tof(self, reading: TofReading) -> Optional[str]:
        zone = reading.zone
        if reading.distance < self.tof_threshold:
            self.tof_counters[zone] += 1
            if self.tof_counters[zone] >= TOF_TRIGGER_COUNT:
                self.tof_counters[zone] = 0
                return zone
        else:
            self.tof_counters[zone] = 0
        return None

    def ingest_vision(self, score: VisionScore) -> bool:
        if score.probability > self.vision_threshold:
            self.vision_counter += 1
            if self.vision_counter >= VISION_TRIGGER_COUNT:
                self.vision_counter = 0
                return True
        else:
            self.vision_counter = 0
        return False


def oca_ingest_tof(state: OcaState, reading: TofReading) -> Tuple[OcaState, Optional[str]]:
    return state, state.ingest_tof(reading)


def oca_ingest_vision(state: OcaState, score: VisionScore) -> Tuple[OcaState, bool]:
    return state, state.ingest_vision(score)


def bearing_zone(bearing: float) -> str:
    """Quadrant classification of a body-frame bearing; partitions the circle."""
    deg = math.degrees(wrap_angle(bearing))
    if -45.0 < deg <= 45.0:
        return "front"
    if -135.0 < deg <= -45.0:
        return "right"
    if 45.0 < deg <= 135.0:
        return "left"
    return "back"


def isca_check(
    own_estimate: Tuple[float, float],
    own_heading: float,
    peer_positions: Dict[int, Tuple[float, float]],
    critical_distance: float = ISCA_CRITICAL_DISTANCE,
) -> List[Tuple[int, str]]:
    """Peers whose tracked position lies within the critical distance."""
    detections: List[Tuple[int, str]] = []
    ox, oy = own_estimate
    for peer in sorted(peer_positions):
        px, py = peer_positions[peer]
        dx, dy = px - ox, py - oy
        if math.hypot(dx, dy) < critical_distance:
            zone = bearing_zone(math.atan2(dy, dx) - own_heading)
            detections.append((peer, zone))
    return detections


class IscaState:
    """Per-peer beacon tracks with a staleness cutoff.

    Each beacon carries the sender's estimated position, velocity, and
    velocity setpoint. Between beacons the receiver dead-reckons the sender
    by replaying the shared slew-limited velocity controller at the base
    tick rate, so the track does not lag the peer by a beacon interval and
    follows its acceleration ramps.
    """

    def __init__(
        self,
        critical_distance: float = ISCA_CRITICAL_DISTANCE,
        staleness: float = ISCA_BEACON_STALENESS,
        tick_dt: float = 0.01,
    ):
        self.critical_distance = critical_distance
        self.staleness = staleness
        self.tick_dt = tick_dt
        self.beacons: Dict[int, PositionBeacon] = {}
        # peer -> (ticks advanced past the beacon, position, velocity)
        self._tracks: Dict[int, Tuple[int, Tuple[float, float], Tuple[float, float]]] = {}

    def store(self, beacon: PositionBeacon) -> None:
        self.beacons[beacon.sender] = beacon
        self._tracks.pop(beacon.sender, None)

    def peer_position(self, peer: int, now: float) -> Optional[Tuple[float, float]]:
        """Tracked position of one peer at `now`, or None if the track is stale."""
        beacon = self.beacons.get(peer)
        if beacon is None or now - beacon.time > self.staleness:
            return None
        dt = self.tick_dt
        ticks = int(round((now - beacon.time) / dt))
        cached = self._tracks.get(peer)
        if cached is None or cached[0] > ticks:
            cached = (0, beacon.estimated_position, beacon.estimated_velocity)
        k, (x, y), (vx, vy) = cached
        tx, ty = beacon.target_velocity
        while k < ticks:
            nvx, nvy = slew_velocity(vx, vy, tx, ty, dt)
            x += (vx + nvx) * 0.5 * dt
            y += (vy + nvy) * 0.5 * dt
            vx, vy = nvx, nvy
            k += 1
        self._tracks[peer] = (k, (x, y), (vx, vy))
        return x, y

    def check(
        self,
        own_estimate: Tuple[float, float],
        own_heading: float,
        now: float,
    ) -> List[Tuple[int, str]]:
        tracked = {}
        for peer in self.beacons:
            position = self.peer_position(peer, now)
            if position is not None:
                tracked[peer] = position
        return isca_check(own_estimate, own_heading, tracked, self.critical_distance)


@dataclass
class PolicyState:
    mode: str = CRUISE
    pending_command: Optional[MotionCommand] = None


def policy_step(
    policy: PolicyState, zones: ZoneFlags, rng
) -> Tuple[PolicyState, MotionCommand]:
    """One 20 ms policy evaluation.

    An in-progress rotation or lateral shift is returned unchanged until the
    motion layer reports completion (the caller then clears pending_command
    and the zone latches). Transition priority:

      1. front and back occupied       -> forced +90 deg rotation
      2. front, or left and right      -> random rotation, 90..270 deg, random sign
      3. left only / right only        -> lateral shift to the opposite side
      4. otherwise (incl. back only)   -> cruise
    """
    if policy.pending_command is not None:
        return policy, policy.pending_command

    if zones.front and zones.back:
        policy.mode = ROTATE_FORCED_90
        cmd = MotionCommand.rotate(FORCED_ROTATE_DELTA)
    elif zones.front or (zones.left and zones.right):
        policy.mode = ROTATE_RANDOM
        magnitude = math.radians(ROTATE_MIN_DEG + (ROTATE_MAX_DEG - ROTATE_MIN_DEG) * rng.random())
        sign = 1.0 if rng.random() < 0.5 else -1.0
        cmd = MotionCommand.rotate(sign * magnitude)
    elif zones.left:
        policy.mode = LATERAL_SHIFT
        cmd = MotionCommand.lateral("right")
    elif zones.right:
        policy.mode = LATERAL_SHIFT
        cmd = MotionCommand.lateral("left")
    else:
        policy.mode = CRUISE
        return policy, MotionCommand.cruise()

    policy.pending_command = cmd
    return policy, cmd


def policy_complete_maneuver(policy: PolicyState) -> None:
    """Called when the motion layer finishes the pending rotate/shift."""
    policy.pending_command = None
    policy.mode = CRUISE
