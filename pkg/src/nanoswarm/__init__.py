"""Deterministic desk-scale simulator of a nano-drone swarm performing
autonomous exploration with multi-sensory collision avoidance."""

__version__ = "0.1.0"

from . import agents, avoidance, compute, localization, sensing, uwbnet, world
from .harness import MissionConfig, run_mission

__all__ = [
    "agents",
    "avoidance",
    "compute",
    "localization",
    "sensing",
    "uwbnet",
    "world",
    "MissionConfig",
    "run_mission",
]
