"""UWB medium simulation: rotating-initiator two-way-ranging schedule,
lossy ranging channel, and position-beacon broadcasting."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

RANGE_FLOOR = 0.01
SLOT_RATE_HZ = 20.0


@dataclass(frozen=True)
class RangeMeasurement:
    initiator: int
    responder: int
    range: float
    time: float


@dataclass(frozen=True)
class PositionBeacon:
    """One broadcast state share: where the sender believes it is, how fast
    it is moving, and the velocity setpoint its controller is slewing toward.
    Receivers dead-reckon the sender between beacons from these three."""

    sender: int
    estimated_position: Tuple[float, float]
    time: float
    estimated_velocity: Tuple[float, float] = (0.0, 0.0)
    target_velocity: Tuple[float, float] = (0.0, 0.0)


@dataclass
class UwbChannelParams:
    range_noise_sigma: float = 0.10   # m
    loss_probability: float = 0.05    # per message

    def __post_init__(self):
        if not 0.0 <= self.loss_probability < 1.0:
            raise ValueError("loss_probability must be in [0, 1)")


class RangingSchedule:
    """Deterministic round-robin TWR schedule with a rotating initiator.

    The current initiator ranges with every other agent in id order; once its
    round of N-1 rangings completes, the next agent in the order becomes the
    initiator. A full cycle is N*(N-1) slots and covers every ordered pair
    exactly once.
    """

    def __init__(self, order: Sequence[int], slot_period: float = 1.0 / SLOT_RATE_HZ):
        if len(order) < 2:
            raise ValueError("ranging needs a swarm of at least 2 agents")
        if len(set(order)) != len(order):
            raise ValueError("schedule order must be a permutation of agent ids")
        self.order = list(order)
        self.slot_period = slot_period
        self._initiator_idx = 0
        self._responder_step = 0  # 0..N-2 within the current initiator round

    @property
    def state(self) -> Tuple[int, int]:
        return (self._initiator_idx, self._responder_step)

    def advance(self) -> Tuple[Tuple[int, int], bool]:
        """Return the next (initiator, responder) pair.

        The second element is True when this slot completes the current
        initiator's round (the moment beacons are broadcast).
        """
        n = len(self.order)
        initiator = self.order[self._initiator_idx]
        responders = [a for a in self.order if a != initiator]
        responder = responders[self._responder_step]
        self._responder_step += 1
        round_complete = self._responder_step == n - 1
        if round_complete:
            self._responder_step = 0
            self._initiator_idx = (self._initiator_idx + 1) % n
        return (initiator, responder), round_complete


def advance_schedule(schedule: RangingSchedule) -> Tuple[RangingSchedule, Tuple[int, int]]:
    pair, _ = schedule.advance()
    return schedule, pair


def perform_ranging(
    pair: Tuple[int, int],
    true_positions: Dict[int, Tuple[float, float]],
    channel: UwbChannelParams,
    rng,
    time: float = 0.0,
) -> Optional[RangeMeasurement]:
    """One TWR exchange; returns None when the message is lost.

    A lost ranging still consumes its slot (the schedule is time-driven).
    The RNG is always drawn identically so losses do not perturb the noise
    stream of later measurements.
    """
    initiator, responder = pair
    noise = rng.gauss(0.0, channel.range_noise_sigma) if channel.range_noise_sigma > 0 else 0.0
    lost = rng.random() < channel.loss_probability
    if lost:
        return None
    pi = true_positions[initiator]
    pr = true_positions[responder]
    r = math.hypot(pi[0] - pr[0], pi[1] - pr[1]) + noise
    return RangeMeasurement(initiator, responder, max(r, RANGE_FLOOR), time)


def broadcast_beacons(
    estimates: Dict[int, Tuple[float, float]],
    channel: UwbChannelParams,
    rng,
    time: float = 0.0,
    velocities: Optional[Dict[int, Tuple[float, float]]] = None,
    targets: Optional[Dict[int, Tuple[float, float]]] = None,
    senders: Optional[Sequence[int]] = None,
) -> Dict[int, List[PositionBeacon]]:
    """Broadcast the estimates of `senders` (default: everyone); each link
    drops independently.

    Delivery order is fixed by (sender id, receiver id) so results are
    independent of dict iteration quirks.
    """
    velocities = velocities or {}
    targets = targets or {}
    delivered: Dict[int, List[PositionBeacon]] = {a: [] for a in estimates}
    for sender in sorted(estimates if senders is None else senders):
        beacon = PositionBeacon(
            sender, tuple(estimates[sender]), time,
            tuple(velocities.get(sender, (0.0, 0.0))),
            tuple(targets.get(sender, (0.0, 0.0))),
        )
        for receiver in sorted(estimates):
            if receiver == sender:
                continue
            if rng.random() >= channel.loss_probability:
                delivered[receiver].append(beacon)
    return delivered
