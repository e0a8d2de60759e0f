from .config import ConfigError, MissionConfig
from .events import EventLog
from .experiments import (
    ApproachTrace,
    generate_traces,
    run_experiment1,
    run_experiment2,
    run_experiment3,
)
from .metrics import IscaScore, MissionReport, mission_report, score_isca
from .mission import run_mission

__all__ = [
    "ApproachTrace",
    "ConfigError",
    "EventLog",
    "IscaScore",
    "MissionConfig",
    "MissionReport",
    "generate_traces",
    "mission_report",
    "run_experiment1",
    "run_experiment2",
    "run_experiment3",
    "run_mission",
    "score_isca",
]
