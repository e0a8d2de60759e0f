"""Metrics computed purely from an event log (replay-idempotent)."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..world import Arena, CoverageGrid
from .events import EventLog

#: Detections closer together than this are merged into one ISCA event.
ISCA_MERGE_GAP_S = 0.25


@dataclass
class IscaScore:
    true_positive: int = 0
    false_positive: int = 0
    false_negative: int = 0

    @property
    def precision(self) -> float:
        denom = self.true_positive + self.false_positive
        return self.true_positive / denom if denom else 1.0

    @property
    def recall(self) -> float:
        denom = self.true_positive + self.false_negative
        return self.true_positive / denom if denom else 1.0

    def to_dict(self) -> dict:
        return {
            "true_positive": self.true_positive,
            "false_positive": self.false_positive,
            "false_negative": self.false_negative,
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
        }


@dataclass
class MissionReport:
    crash_free: bool
    crash_count: int
    crashes_per_minute: float
    coverage_fraction: float
    coverage_per_minute: float
    isca: IscaScore
    duration_s: float
    config_hash: str

    def to_dict(self) -> dict:
        return {
            "crash_free": self.crash_free,
            "crash_count": self.crash_count,
            "crashes_per_minute": round(self.crashes_per_minute, 6),
            "coverage_fraction": round(self.coverage_fraction, 6),
            "coverage_per_minute": round(self.coverage_per_minute, 6),
            "isca": self.isca.to_dict(),
            "duration_s": self.duration_s,
            "config_hash": self.config_hash,
        }


def _merge_times(times: List[float], gap: float) -> List[Tuple[float, float]]:
    """Collapse a sorted list of sample times into maximal intervals."""
    intervals: List[Tuple[float, float]] = []
    for t in times:
        if intervals and t - intervals[-1][1] <= gap:
            intervals[-1] = (intervals[-1][0], t)
        else:
            intervals.append((t, t))
    return intervals


def _overlaps(a: Tuple[float, float], b: Tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def score_isca(
    truth_intervals: Dict[tuple, List[Tuple[float, float]]],
    detection_intervals: Dict[tuple, List[Tuple[float, float]]],
) -> IscaScore:
    """Event-level interval-overlap scoring of ISCA detections.

    A ground-truth close-encounter event counts as detected (TP) when any
    detection interval for the same pair overlaps it; unmatched detections
    are false positives, unmatched truth events false negatives.
    """
    score = IscaScore()
    pairs = set(truth_intervals) | set(detection_intervals)
    for pair in sorted(pairs):
        truths = truth_intervals.get(pair, [])
        dets = detection_intervals.get(pair, [])
        for truth in truths:
            if any(_overlaps(truth, d) for d in dets):
                score.true_positive += 1
            else:
                score.false_negative += 1
        for d in dets:
            if not any(_overlaps(truth, d) for truth in truths):
                score.false_positive += 1
    return score


def mission_report(log: EventLog, isca_merge_gap: float = ISCA_MERGE_GAP_S) -> MissionReport:
    header = log.header()
    config = header["config"]
    duration_s = float(config["mission.duration_s"])
    critical = float(config["policy.isca_critical_m"])
    minutes = duration_s / 60.0
    arena = Arena.from_dict(header["arena"])

    crash_count = len(log.of_type("crash"))

    grid = CoverageGrid(arena.width, arena.height)
    positions_by_tick: Dict[float, Dict[int, Tuple[float, float]]] = {}
    for rec in log.records:
        if rec["type"] != "traj":
            continue
        pos = (rec["x"], rec["y"])
        grid.mark(pos)
        positions_by_tick.setdefault(rec["t"], {})[rec["agent"]] = pos

    # Ground-truth close encounters per unordered agent pair.
    truth_times: Dict[tuple, List[float]] = {}
    for t in positions_by_tick:  # insertion order: non-decreasing times
        agents_at_t = positions_by_tick[t]
        ids = sorted(agents_at_t)
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                xi, yi = agents_at_t[ids[i]]
                xj, yj = agents_at_t[ids[j]]
                if math.hypot(xi - xj, yi - yj) < critical:
                    truth_times.setdefault((ids[i], ids[j]), []).append(t)

    det_times: Dict[tuple, List[float]] = {}
    for rec in log.of_type("isca"):
        pair = tuple(sorted((rec["agent"], rec["peer"])))
        det_times.setdefault(pair, []).append(rec["t"])
    for times in det_times.values():
        times.sort()

    # Truth sampled at the base tick; bridge one missing tick.
    truth_intervals = {p: _merge_times(ts, 0.021) for p, ts in truth_times.items()}
    detection_intervals = {p: _merge_times(ts, isca_merge_gap) for p, ts in det_times.items()}
    isca = score_isca(truth_intervals, detection_intervals)

    return MissionReport(
        crash_free=crash_count == 0,
        crash_count=crash_count,
        crashes_per_minute=crash_count / minutes,
        coverage_fraction=grid.fraction,
        coverage_per_minute=100.0 * grid.fraction / minutes,
        isca=isca,
        duration_s=duration_s,
        config_hash=header["config_hash"],
    )
