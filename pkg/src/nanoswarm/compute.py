"""Shared visual-processing engine model: interleaved task execution and the
effective CNN frame rate that gates vision sampling."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

_EPS = 1e-9


@dataclass(frozen=True)
class ComputeTaskSpec:
    name: str
    latency: float                    # seconds per execution
    parameters_mb: Optional[float] = None   # metadata, echoed into reports
    memory_kb: Optional[float] = None
    power_mw: Optional[float] = None

    def __post_init__(self):
        if self.latency <= 0.0:
            raise ValueError("task latency must be > 0")


@dataclass(frozen=True)
class ScheduleModel:
    """Round-robin interleaving: each task executes once per cycle."""

    tasks: tuple
    overhead: float = 0.0             # per-frame capture/compression seconds

    @property
    def cycle_time(self) -> float:
        return sum(t.latency for t in self.tasks) + self.overhead

    def task(self, name: str) -> ComputeTaskSpec:
        for t in self.tasks:
            if t.name == name:
                return t
        raise KeyError(f"unknown compute task {name!r}")

    def has_task(self, name: str) -> bool:
        return any(t.name == name for t in self.tasks)


def effective_rate(model: ScheduleModel, task_name: str) -> float:
    """Frames per second each task achieves (one execution per cycle)."""
    model.task(task_name)  # raises on unknown task
    return 1.0 / model.cycle_time


def rate_or_zero(model: Optional[ScheduleModel], task_name: str) -> float:
    """effective_rate, but 0.0 when the task (or the model) is absent."""
    if model is None or not model.has_task(task_name):
        return 0.0
    return 1.0 / model.cycle_time


def frame_clock(rate: float, sim_time: float, dt: float) -> bool:
    """True exactly when sim_time crosses a multiple of 1/rate.

    Grants are evenly spaced (idealized scheduler); rate 0 never grants.
    The first grant is at t = 1/rate, not at t = 0.
    """
    if rate <= 0.0:
        return False
    k1 = math.floor(sim_time * rate + _EPS)
    k0 = math.floor((sim_time - dt) * rate + _EPS)
    return k1 > k0


SSD_TASK = ComputeTaskSpec("ssd_mbv2", 0.5892, parameters_mb=4.67, memory_kb=250.0, power_mw=134.0)
DRONET_TASK = ComputeTaskSpec("dronet", 0.0159, parameters_mb=0.0832, memory_kb=200.4, power_mw=100.9)

#: Named compute profiles shipped with the mission configuration.
PROFILES: Dict[str, Optional[ScheduleModel]] = {
    # Interleaved object detection + collision CNN: 1.6 Hz for both tasks.
    "ssd_dronet": ScheduleModel((SSD_TASK, DRONET_TASK), overhead=0.02),
    # Collision CNN alone at its hardware peak (62.9 Hz).
    "dronet_peak": ScheduleModel((DRONET_TASK,), overhead=0.0),
    # Collision CNN with capture/compression/logging overhead: the 5 Hz setup.
    "dronet_5hz": ScheduleModel((DRONET_TASK,), overhead=0.1841),
    # No vision task at all (ToF-only baseline).
    "none": None,
}

VISION_TASK_NAME = DRONET_TASK.name
