"""Single-mission simulation loop: clocks, agents, sensing, UWB, policy, log."""

import math
import random
from typing import Dict, List, Optional, Tuple

from .. import compute
from ..agents import (
    AgentBody,
    CrashTracker,
    MotionCommand,
    integrate,
    target_velocity,
)
from ..avoidance import (
    CRUISE,
    IscaState,
    OcaState,
    PolicyState,
    ROTATE_RANDOM,
    ZoneFlags,
    policy_complete_maneuver,
    policy_step,
)
from ..localization import PositionEkf
from ..sensing import ZONES, sample_ego_motion, sample_tof, sample_vision
from ..uwbnet import PositionBeacon, RangingSchedule, broadcast_beacons, perform_ranging
from ..world import Arena, CoverageGrid, TAKEOFF_ANCHORS, build_preset
from .config import (
    MissionConfig,
    POLICY_PERIOD_TICKS,
    SENSOR_PERIOD_TICKS,
    TICK_RATE_HZ,
)
from .events import EventLog, FORMAT_VERSION
from .metrics import MissionReport, mission_report

CRASH_BACKOFF_M = 0.1
CRASH_RECOVERY_ROTATION = math.pi


class _Agent:
    """All per-drone mutable state owned by one run."""

    __slots__ = (
        "body", "policy", "oca", "isca", "ekf", "command", "latched",
        "consumed",
        "rng_tof", "rng_vision", "rng_ego", "rng_policy",
    )

    def __init__(self, body: AgentBody, config: MissionConfig, run_tag: str):
        self.body = body
        self.policy = PolicyState()
        self.oca = OcaState()
        self.isca = IscaState(config.isca_critical_m, config.isca_staleness_s)
        self.ekf = PositionEkf((body.x, body.y), config.ekf)
        self.command = MotionCommand.cruise()
        self.latched: Dict[str, str] = {}  # zone -> source
        self.consumed: Tuple[str, ...] = ()  # zones resolved by the active maneuver
        i = body.id
        self.rng_tof = random.Random(config.stream_seed(run_tag, "tof", i))
        self.rng_vision = random.Random(config.stream_seed(run_tag, "vision", i))
        self.rng_ego = random.Random(config.stream_seed(run_tag, "ego", i))
        self.rng_policy = random.Random(config.stream_seed(run_tag, "policy", i))


def _broadcast_state(
    agents, by_id, config, rng_channel, t_next, log, log_sensors,
    senders, trigger,
) -> None:
    """Broadcast position beacons for `senders` (None: everyone) and store
    the delivered ones in each receiver's ISCA track table."""
    estimates = {a.body.id: a.ekf.position for a in agents}
    velocities = {a.body.id: a.ekf.velocity for a in agents}
    targets = {a.body.id: target_velocity(a.body, a.command) for a in agents}
    delivered = broadcast_beacons(
        estimates, config.uwb, rng_channel, t_next,
        velocities, targets, senders,
    )
    links = []
    for receiver in sorted(delivered):
        for beacon in delivered[receiver]:
            by_id[receiver].isca.store(beacon)
            links.append([beacon.sender, receiver])
    if log_sensors:
        log.append(
            {"type": "beacons", "t": t_next, "links": links, "trigger": trigger}
        )


def takeoff_pose(arena: Arena, preset: str, index: int) -> Tuple[float, float, float]:
    anchors = TAKEOFF_ANCHORS[preset]
    if index >= len(anchors):
        raise ValueError(
            f"preset {preset!r} supports at most {len(anchors)} agents"
        )
    x, y = anchors[index]
    heading = math.atan2(arena.height / 2.0 - y, arena.width / 2.0 - x)
    return x, y, heading


def run_mission(
    config: MissionConfig,
    run_tag: str = "run0",
    log_sensors: bool = True,
) -> Tuple[EventLog, MissionReport]:
    """Simulate one mission at a 100 Hz base tick; deterministic in (config, run_tag)."""
    config.validate()
    arena = build_preset(config.arena_preset, config.arena_seed)
    n = config.swarm_size
    dt = 1.0 / TICK_RATE_HZ
    n_ticks = round(config.duration_s * TICK_RATE_HZ)

    log = EventLog()
    log.append(
        {
            "type": "header",
            "format_version": FORMAT_VERSION,
            "config": {k: str(v) for k, v in config.to_flat().items()},
            "config_hash": config.config_hash(),
            "run_tag": run_tag,
            "arena": arena.to_dict(),
        }
    )

    agents: List[_Agent] = []
    for i in range(n):
        x, y, heading = takeoff_pose(arena, config.arena_preset, i)
        agents.append(_Agent(AgentBody(i, x, y, heading), config, run_tag))

    # Known take-off positions seed every beacon store at t=0.
    for a in agents:
        for b in agents:
            if a is not b:
                a.isca.store(
                    PositionBeacon(
                        b.body.id, (b.body.x, b.body.y), 0.0, (0.0, 0.0),
                        target_velocity(b.body, MotionCommand.cruise()),
                    )
                )

    grid = CoverageGrid(arena.width, arena.height)
    for a in agents:
        grid.mark((a.body.x, a.body.y))

    tracker = CrashTracker()
    vision_rate = config.vision_rate()
    noise = config.sensors
    vision_params = config.vision

    schedule = RangingSchedule([a.body.id for a in agents]) if n >= 2 else None
    rng_channel = random.Random(config.stream_seed(run_tag, "channel"))
    bodies = [a.body for a in agents]
    by_id = {a.body.id: a for a in agents}
    r_min = agents[0].body.footprint_radius if agents else 0.05

    for k in range(n_ticks):
        t = k / TICK_RATE_HZ
        t_next = (k + 1) / TICK_RATE_HZ
        command_changed = set()

        # Policy evaluation every 20 ms, using latched OCA triggers plus
        # this tick's ISCA detections.
        if k % POLICY_PERIOD_TICKS == 0:
            for a in agents:
                flags = ZoneFlags()
                for zone, source in a.latched.items():
                    flags.set(zone, source)
                if n >= 2:
                    for peer, zone in a.isca.check(
                        a.ekf.position, a.body.heading, t
                    ):
                        flags.set(zone, "isca")
                        log.append(
                            {"type": "isca", "t": t, "agent": a.body.id,
                             "peer": peer, "zone": zone}
                        )
                had_pending = a.policy.pending_command is not None
                _, cmd = policy_step(a.policy, flags, a.rng_policy)
                if a.policy.pending_command is not None and not had_pending:
                    a.command = cmd
                    a.consumed = tuple(a.latched)
                    command_changed.add(a.body.id)
                    log.append(
                        {"type": "cmd", "t": t, "agent": a.body.id,
                         "mode": a.policy.mode, "cmd": cmd.describe()}
                    )
                elif a.policy.pending_command is None:
                    a.command = cmd

        # Motion integration, coverage, trajectory logging.
        for a in agents:
            _, done = integrate(a.body, a.command, dt)
            b = a.body
            b.x = min(max(b.x, r_min), arena.width - r_min)
            b.y = min(max(b.y, r_min), arena.height - r_min)
            if done:
                policy_complete_maneuver(a.policy)
                if a.command.kind == "rotate":
                    # Zone latches are body-frame; a rotation invalidates
                    # anything latched before or during it.
                    a.latched.clear()
                else:
                    # A lateral shift keeps the heading, so triggers latched
                    # while it ran are still valid; drop only the ones the
                    # maneuver was issued for.
                    for zone in a.consumed:
                        a.latched.pop(zone, None)
                a.consumed = ()
                a.command = MotionCommand.cruise()
                command_changed.add(b.id)
                log.append(
                    {"type": "cmd", "t": t_next, "agent": b.id,
                     "mode": CRUISE, "cmd": "cruise"}
                )
            grid.mark((b.x, b.y))

        # Crash detection and recovery.
        for event in tracker.update(bodies, arena, t_next):
            a = by_id[event.agent]
            b = a.body
            log.append(
                {"type": "crash", "t": t_next, "agent": b.id,
                 "x": round(b.x, 6), "y": round(b.y, 6),
                 "obstacle": event.obstacle}
            )
            speed = math.hypot(b.vx, b.vy)
            if speed > 1e-9:
                ux, uy = b.vx / speed, b.vy / speed
            else:
                ux, uy = math.cos(b.heading), math.sin(b.heading)
            b.x = min(max(b.x - CRASH_BACKOFF_M * ux, r_min), arena.width - r_min)
            b.y = min(max(b.y - CRASH_BACKOFF_M * uy, r_min), arena.height - r_min)
            b.vx = b.vy = b.ax = b.ay = 0.0
            a.command = MotionCommand.rotate(CRASH_RECOVERY_ROTATION)
            a.policy.mode = ROTATE_RANDOM
            a.policy.pending_command = a.command
            a.latched.clear()
            a.consumed = ()
            command_changed.add(b.id)

        # Ego-motion + EKF at the full tick rate.
        for a in agents:
            sample = sample_ego_motion(a.body, a.rng_ego, noise, t_next)
            a.ekf.predict(sample.acceleration, a.body.heading, dt)
            a.ekf.update_flow(sample.flow_velocity, a.body.heading)

        for a in agents:
            b = a.body
            log.append(
                {"type": "traj", "t": t_next, "agent": b.id,
                 "x": round(b.x, 6), "y": round(b.y, 6),
                 "h": round(b.heading, 6),
                 "ex": round(a.ekf.mean[0], 6), "ey": round(a.ekf.mean[1], 6)}
            )

        # A changed motion command invalidates peers' dead-reckoned tracks,
        # so the affected agents broadcast a state beacon right away.
        if schedule is not None and command_changed:
            _broadcast_state(
                agents, by_id, config, rng_channel, t_next, log,
                log_sensors, senders=sorted(command_changed), trigger="cmd",
            )

        # ToF sensing on the 20 Hz clock.
        if (k + 1) % SENSOR_PERIOD_TICKS == 0:
            for a in agents:
                for zone in ZONES:
                    reading = sample_tof(
                        arena, bodies, a.body, zone, a.rng_tof, noise, t_next
                    )
                    if log_sensors:
                        log.append(
                            {"type": "tof", "t": t_next, "agent": a.body.id,
                             "zone": zone, "d": round(reading.distance, 4)}
                        )
                    triggered = a.oca.ingest_tof(reading)
                    if triggered is not None:
                        a.latched.setdefault(triggered, "tof")
                        log.append(
                            {"type": "oca_tof", "t": t_next,
                             "agent": a.body.id, "zone": triggered}
                        )

        # Vision frames per the compute module's effective rate.
        if compute.frame_clock(vision_rate, t_next, dt):
            for a in agents:
                score = sample_vision(
                    arena, bodies, a.body, vision_params, a.rng_vision, t_next
                )
                if log_sensors:
                    log.append(
                        {"type": "vision", "t": t_next, "agent": a.body.id,
                         "p": round(score.probability, 4)}
                    )
                if a.oca.ingest_vision(score):
                    a.latched.setdefault("front", "vision")
                    log.append(
                        {"type": "oca_vision", "t": t_next, "agent": a.body.id}
                    )

        # UWB ranging slot (20 Hz) and beacon broadcast per initiator round.
        if schedule is not None and (k + 1) % SENSOR_PERIOD_TICKS == 0:
            pair, round_complete = schedule.advance()
            positions = {a.body.id: (a.body.x, a.body.y) for a in agents}
            measurement = perform_ranging(
                pair, positions, config.uwb, rng_channel, t_next
            )
            if log_sensors:
                log.append(
                    {"type": "uwb", "t": t_next, "i": pair[0], "r": pair[1],
                     "range": round(measurement.range, 4) if measurement else None}
                )
            if measurement is not None:
                for me, other in ((pair[0], pair[1]), (pair[1], pair[0])):
                    anchor = by_id[me].isca.peer_position(other, t_next)
                    if anchor is not None:
                        by_id[me].ekf.update_range(anchor, measurement.range)
            if round_complete:
                _broadcast_state(
                    agents, by_id, config, rng_channel, t_next, log,
                    log_sensors, senders=None, trigger="round",
                )

    report = mission_report(log)
    return log, report
