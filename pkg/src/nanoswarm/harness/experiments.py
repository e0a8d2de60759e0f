"""Batch experiment runners: obstacle-avoidance benchmark, frame-rate study,
and intra-swarm collision-avoidance scoring."""

import hashlib
import math
import random
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

from ..avoidance import OcaState
from ..sensing import SensorNoise, TofReading, VisionProxyParams, VisionScore, _logistic
from ..world import THIN_RADIUS
from .config import (
    MODE_TOF_AND_VISION,
    MODE_TOF_ONLY,
    MissionConfig,
)
from .events import FORMAT_VERSION
from .metrics import IscaScore
from .mission import run_mission

DEFAULT_EXP1_RUNS = {
    "obstacle_free": 5,
    "obstacle_populated": 20,
    "narrow_corridor": 10,
}
EXP1_CELLS = [
    ("obstacle_free", MODE_TOF_ONLY),
    ("obstacle_populated", MODE_TOF_ONLY),
    ("obstacle_populated", MODE_TOF_AND_VISION),
    ("narrow_corridor", MODE_TOF_ONLY),
    ("narrow_corridor", MODE_TOF_AND_VISION),
]

DEFAULT_FPS_LIST = (1, 2, 3, 4, 5, 6, 8, 10)


def _derive_int(*parts) -> int:
    label = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")


# ---------------------------------------------------------------------------
# Experiment 1: obstacle avoidance across environments and sensing modes
# ---------------------------------------------------------------------------

def _exp1_config(env: str, mode: str, run_idx: int, master_seed: int, duration: float) -> MissionConfig:
    return MissionConfig(
        arena_preset=env,
        arena_seed=_derive_int("exp1-arena", master_seed, env, run_idx) % (2**31),
        swarm_size=1,
        duration_s=duration,
        mode=mode,
        master_seed=master_seed,
        compute_profile="dronet_5hz",
    )


def _exp1_worker(args) -> Tuple[str, str, int, dict]:
    env, mode, run_idx, master_seed, duration = args
    config = _exp1_config(env, mode, run_idx, master_seed, duration)
    _, report = run_mission(
        config, run_tag=f"exp1:{env}:{mode}:{run_idx}", log_sensors=False
    )
    return env, mode, run_idx, report.to_dict()


def _bootstrap_ci(values: Sequence[float], seed: int, n_boot: int = 1000) -> Tuple[float, float]:
    if not values:
        return (0.0, 0.0)
    rng = random.Random(seed)
    stats = []
    n = len(values)
    for _ in range(n_boot):
        stats.append(sum(rng.choice(values) for _ in range(n)) / n)
    stats.sort()
    return (stats[int(0.025 * n_boot)], stats[min(int(0.975 * n_boot), n_boot - 1)])


def _run_parallel(worker, tasks: list, jobs: int) -> list:
    if jobs <= 1:
        return [worker(t) for t in tasks]
    with Pool(jobs) as pool:
        return pool.map(worker, tasks)


def run_experiment1(
    master_seed: int = 0,
    runs: Optional[Dict[str, int]] = None,
    runs_override: Optional[int] = None,
    duration: float = 240.0,
    jobs: int = 1,
    cells: Optional[List[Tuple[str, str]]] = None,
) -> dict:
    """Seeded batch of single-drone missions, summarized per (env, mode) cell."""
    run_counts = dict(DEFAULT_EXP1_RUNS)
    if runs:
        run_counts.update(runs)
    if runs_override is not None:
        run_counts = {env: runs_override for env in run_counts}
    cells = cells or EXP1_CELLS

    tasks = [
        (env, mode, idx, master_seed, duration)
        for env, mode in cells
        for idx in range(run_counts[env])
    ]
    results = _run_parallel(_exp1_worker, tasks, jobs)

    by_cell: Dict[Tuple[str, str], List[Tuple[int, dict]]] = {c: [] for c in cells}
    for env, mode, idx, report in results:
        by_cell[(env, mode)].append((idx, report))

    summary_cells = []
    for env, mode in cells:
        reports = [r for _, r in sorted(by_cell[(env, mode)])]
        n = len(reports)
        crash_free = sum(1 for r in reports if r["crash_free"])
        crash_rates = [r["crashes_per_minute"] for r in reports]
        coverage = [r["coverage_per_minute"] for r in reports]
        ci = _bootstrap_ci(crash_rates, _derive_int("exp1-ci", master_seed, env, mode))
        summary_cells.append(
            {
                "env": env,
                "mode": mode,
                "runs": n,
                "crash_free_rounds": crash_free,
                "crash_free_rate": round(crash_free / n, 6),
                "avg_crash_per_min": round(sum(crash_rates) / n, 6),
                "crash_per_min_ci95": [round(ci[0], 6), round(ci[1], 6)],
                "avg_coverage_per_min_pct": round(sum(coverage) / n, 6),
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "experiment": "exp1",
        "master_seed": master_seed,
        "duration_s": duration,
        "cells": summary_cells,
    }


# ---------------------------------------------------------------------------
# Experiment 2: vision throughput vs obstacle detection on approach traces
# ---------------------------------------------------------------------------

VIDEO_FPS = 10.0
TOF_FPS = 20.0
MIN_TRACE_FRAMES = 12

#: The recorded obstacle set: six chair legs and two tripods.
OBSTACLE_INSTANCES = [("chair_leg", THIN_RADIUS)] * 6 + [("tripod", 0.04)] * 2


@dataclass
class ApproachTrace:
    """One recorded head-on approach: vision frames at 10 Hz, ToF at 20 Hz."""

    scores: List[float]
    tof: List[float]
    kind: str
    impact_frame: int       # first 10 Hz frame index at/after impact
    impact_time: float

    def __post_init__(self):
        if len(self.scores) < MIN_TRACE_FRAMES:
            raise ValueError(
                f"approach trace needs >= {MIN_TRACE_FRAMES} frames, got {len(self.scores)}"
            )


def generate_trace(
    kind: str,
    radius: float,
    seed: int,
    vision: Optional[VisionProxyParams] = None,
    noise: Optional[SensorNoise] = None,
    speed: float = 0.5,
) -> ApproachTrace:
    """Synthesize one approach: drone flying straight at an isolated obstacle."""
    vision = vision or VisionProxyParams()
    noise = noise or SensorNoise()
    rng = random.Random(seed)
    start = 0.45 + 0.5 * rng.random()           # m; obstacle pops into view close
    offset = (rng.random() - 0.5) * 0.08        # lateral aim error, collision course
    footprint = 0.05

    cx, cy = start, offset
    impact_dist = footprint + radius
    x = 0.0
    dt = 1.0 / 100.0
    scores: List[float] = []
    tof: List[float] = []
    impact_time = None
    k = 0
    while impact_time is None:
        x += speed * dt
        k += 1
        t = k * dt
        dist = math.hypot(cx - x, cy)
        if dist <= impact_dist:
            impact_time = t
        if k % 5 == 0:  # 20 Hz ToF
            angle = rng.gauss(0.0, noise.tof_jitter_sigma) if noise.tof_jitter_sigma > 0 else 0.0
            d = _ray_disc_1d(x, cx, cy, angle, radius)
            d += rng.gauss(0.0, noise.tof_sigma) if noise.tof_sigma > 0 else 0.0
            tof.append(min(max(d, 0.01), 4.0))
        if k % 10 == 0:  # 10 Hz camera
            p = _logistic((vision.d0 - max(dist - radius, 0.0)) / vision.slope)
            if vision.noise_sigma > 0:
                p += rng.gauss(0.0, vision.noise_sigma)
            scores.append(min(max(p, vision.false_positive_floor), 1.0))
    impact_frame = math.ceil(impact_time * VIDEO_FPS - 1e-9)
    # pad with post-impact frames so every trace has >= 12 recorded frames
    while len(scores) < MIN_TRACE_FRAMES:
        scores.append(1.0)
    return ApproachTrace(scores, tof, kind, impact_frame, impact_time)


def _ray_disc_1d(x: float, cx: float, cy: float, angle: float, r: float) -> float:
    """Distance from (x, 0) along direction `angle` to the disc, or 4.0."""
    dx, dy = math.cos(angle), math.sin(angle)
    fx, fy = x - cx, -cy
    b = fx * dx + fy * dy
    c = fx * fx + fy * fy - r * r
    if c <= 0.0:
        return 0.0
    disc = b * b - c
    if disc < 0.0:
        return 4.0
    t = -b - math.sqrt(disc)
    return t if 0.0 <= t <= 4.0 else 4.0


def generate_traces(
    n_traces: int = 64,
    seed: int = 0,
    vision: Optional[VisionProxyParams] = None,
    noise: Optional[SensorNoise] = None,
) -> List[ApproachTrace]:
    traces = []
    for i in range(n_traces):
        kind, radius = OBSTACLE_INSTANCES[i % len(OBSTACLE_INSTANCES)]
        traces.append(
            generate_trace(kind, radius, _derive_int("exp2-trace", seed, i), vision, noise)
        )
    return traces


def _tof_detected(trace: ApproachTrace) -> bool:
    oca = OcaState()
    for j, d in enumerate(trace.tof):
        t = (j + 1) / TOF_FPS
        if t >= trace.impact_time:
            break
        if oca.ingest_tof(TofReading("front", d, t)) is not None:
            return True
    return False


def _vision_detected(trace: ApproachTrace, fps: float) -> bool:
    oca = OcaState()
    k = 0
    prev_idx = -1
    while True:
        idx = round(k * VIDEO_FPS / fps)
        k += 1
        if idx == prev_idx:
            continue
        prev_idx = idx
        if idx >= trace.impact_frame or idx >= len(trace.scores):
            return False
        if oca.ingest_vision(VisionScore(trace.scores[idx], idx / VIDEO_FPS)):
            return True


def run_experiment2(
    traces: Optional[List[ApproachTrace]] = None,
    fps_list: Sequence[float] = DEFAULT_FPS_LIST,
    n_traces: int = 64,
    seed: int = 0,
) -> dict:
    """Detection decomposition per vision frame rate over approach traces."""
    for fps in fps_list:
        if not 1.0 <= fps <= 10.0:
            raise ValueError(f"fps values must lie in [1, 10], got {fps}")
    if traces is None:
        traces = generate_traces(n_traces, seed)
    tof_hits = [_tof_detected(tr) for tr in traces]
    n = len(traces)
    rows = []
    for fps in fps_list:
        tof_count = 0
        vision_only = 0
        missed = 0
        for trace, tof_hit in zip(traces, tof_hits):
            if tof_hit:
                tof_count += 1
            elif _vision_detected(trace, fps):
                vision_only += 1
            else:
                missed += 1
        detected = tof_count + vision_only
        rows.append(
            {
                "fps": fps,
                "tof_detected": tof_count,
                "vision_only_detected": vision_only,
                "missed": missed,
                "detected": detected,
                "detection_rate": round(detected / n, 6),
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "experiment": "exp2",
        "seed": seed,
        "traces": n,
        "per_fps": rows,
    }


# ---------------------------------------------------------------------------
# Experiment 3: ISCA precision/recall with a four-drone swarm
# ---------------------------------------------------------------------------

def _exp3_config(
    run_idx: int,
    master_seed: int,
    duration: float,
    swarm_size: int,
    range_sigma: float,
    loss: float,
    noise_free: bool,
) -> MissionConfig:
    config = MissionConfig(
        arena_preset="obstacle_free",
        arena_seed=0,
        swarm_size=swarm_size,
        duration_s=duration,
        mode=MODE_TOF_ONLY,
        master_seed=master_seed,
    )
    config.uwb.range_noise_sigma = 0.0 if noise_free else range_sigma
    config.uwb.loss_probability = 0.0 if noise_free else loss
    if noise_free:
        config.sensors = SensorNoise(
            tof_sigma=0.0, tof_jitter_sigma=0.0, flow_sigma=0.0, accel_sigma=0.0
        )
    return config


def _exp3_worker(args) -> Tuple[int, dict]:
    run_idx, master_seed, duration, swarm_size, range_sigma, loss, noise_free = args
    config = _exp3_config(
        run_idx, master_seed, duration, swarm_size, range_sigma, loss, noise_free
    )
    _, report = run_mission(
        config, run_tag=f"exp3:{run_idx}", log_sensors=False
    )
    return run_idx, report.to_dict()


def run_experiment3(
    master_seed: int = 0,
    runs: int = 5,
    duration: float = 120.0,
    swarm_size: int = 4,
    range_sigma: float = 0.10,
    loss: float = 0.05,
    noise_free: bool = False,
    jobs: int = 1,
) -> dict:
    """ISCA event-level precision/recall aggregated over seeded swarm runs."""
    if swarm_size < 2:
        raise ValueError("experiment 3 needs a swarm of at least 2 agents")
    tasks = [
        (idx, master_seed, duration, swarm_size, range_sigma, loss, noise_free)
        for idx in range(runs)
    ]
    results = _run_parallel(_exp3_worker, tasks, jobs)
    reports = [r for _, r in sorted(results)]
    total = IscaScore()
    for r in reports:
        total.true_positive += r["isca"]["true_positive"]
        total.false_positive += r["isca"]["false_positive"]
        total.false_negative += r["isca"]["false_negative"]
    return {
        "format_version": FORMAT_VERSION,
        "experiment": "exp3",
        "master_seed": master_seed,
        "runs": runs,
        "duration_s": duration,
        "swarm_size": swarm_size,
        "isca": total.to_dict(),
        "per_run": [r["isca"] for r in reports],
        "crash_count": sum(r["crash_count"] for r in reports),
    }
