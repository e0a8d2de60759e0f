"""Mission configuration: defaults, dotted-key text format, seed derivation."""

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

from ..localization import NoiseConfig
from ..sensing import SensorNoise, VisionProxyParams
from ..uwbnet import UwbChannelParams
from .. import compute
from ..world import PRESET_NAMES

FORMAT_VERSION = 1

MODE_TOF_ONLY = "tof_only"
MODE_TOF_AND_VISION = "tof_and_vision"
MODES = (MODE_TOF_ONLY, MODE_TOF_AND_VISION)

DEFAULT_DURATION_S = 240.0
TICK_RATE_HZ = 100
POLICY_PERIOD_TICKS = 2   # 20 ms
SENSOR_PERIOD_TICKS = 5   # 20 Hz ToF and UWB slots


@dataclass
class MissionConfig:
    """Everything that determines one run, serializable and hashable."""

    arena_preset: str = "obstacle_free"
    arena_seed: int = 0
    swarm_size: int = 1
    duration_s: float = DEFAULT_DURATION_S
    mode: str = MODE_TOF_ONLY
    master_seed: int = 0
    compute_profile: str = "dronet_5hz"
    sensors: SensorNoise = field(default_factory=SensorNoise)
    vision: VisionProxyParams = field(default_factory=VisionProxyParams)
    uwb: UwbChannelParams = field(default_factory=UwbChannelParams)
    ekf: NoiseConfig = field(default_factory=NoiseConfig)
    isca_critical_m: float = 0.65
    isca_staleness_s: float = 0.5

    def validate(self) -> None:
        if self.arena_preset not in PRESET_NAMES:
            raise ConfigError(f"unknown arena preset {self.arena_preset!r}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.compute_profile not in compute.PROFILES:
            raise ConfigError(f"unknown compute profile {self.compute_profile!r}")
        if self.duration_s <= 0.0:
            raise ConfigError("mission duration must be > 0")
        if self.swarm_size < 1:
            raise ConfigError("swarm size must be >= 1")

    def vision_rate(self) -> float:
        """Effective CNN frame rate; 0 in ToF-only mode or with no vision task."""
        if self.mode == MODE_TOF_ONLY:
            return 0.0
        return compute.rate_or_zero(
            compute.PROFILES[self.compute_profile], compute.VISION_TASK_NAME
        )

    def stream_seed(self, *parts) -> int:
        """Derive an independent RNG seed from the master seed and a label path."""
        label = ":".join(str(p) for p in (self.master_seed,) + parts)
        return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")

    # -- flat dotted-key mapping ------------------------------------------

    def to_flat(self) -> Dict[str, object]:
        return {
            "format_version": FORMAT_VERSION,
            "arena.preset": self.arena_preset,
            "arena.seed": self.arena_seed,
            "swarm.size": self.swarm_size,
            "mission.duration_s": self.duration_s,
            "mission.mode": self.mode,
            "mission.master_seed": self.master_seed,
            "compute.profile": self.compute_profile,
            "sensors.tof.sigma_m": self.sensors.tof_sigma,
            "sensors.tof.jitter_deg": math.degrees(self.sensors.tof_jitter_sigma),
            "sensors.flow.sigma_mps": self.sensors.flow_sigma,
            "sensors.accel.sigma_mps2": self.sensors.accel_sigma,
            "vision.fov_rad": self.vision.fov,
            "vision.d0_m": self.vision.d0,
            "vision.slope_m": self.vision.slope,
            "vision.noise_sigma": self.vision.noise_sigma,
            "vision.false_positive_floor": self.vision.false_positive_floor,
            "uwb.range_noise_sigma_m": self.uwb.range_noise_sigma,
            "uwb.loss_probability": self.uwb.loss_probability,
            "ekf.process_accel_sigma": self.ekf.process_accel_sigma,
            "ekf.flow_sigma": self.ekf.flow_meas_sigma,
            "ekf.range_sigma": self.ekf.range_meas_sigma,
            "policy.isca_critical_m": self.isca_critical_m,
            "policy.isca_staleness_s": self.isca_staleness_s,
        }

    def to_text(self) -> str:
        lines = [f"{k} = {v}" for k, v in self.to_flat().items()]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    @classmethod
    def from_flat(cls, flat: Dict[str, object]) -> "MissionConfig":
        cfg = cls()
        known = set(cfg.to_flat())
        unknown = set(flat) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        g = flat.get
        version = g("format_version", FORMAT_VERSION)
        if int(version) != FORMAT_VERSION:
            raise ConfigError(f"unsupported format_version {version}")
        cfg = cls(
            arena_preset=str(g("arena.preset", cfg.arena_preset)),
            arena_seed=int(g("arena.seed", cfg.arena_seed)),
            swarm_size=int(g("swarm.size", cfg.swarm_size)),
            duration_s=float(g("mission.duration_s", cfg.duration_s)),
            mode=str(g("mission.mode", cfg.mode)),
            master_seed=int(g("mission.master_seed", cfg.master_seed)),
            compute_profile=str(g("compute.profile", cfg.compute_profile)),
            sensors=SensorNoise(
                tof_sigma=float(g("sensors.tof.sigma_m", cfg.sensors.tof_sigma)),
                tof_jitter_sigma=math.radians(
                    float(g("sensors.tof.jitter_deg",
                            math.degrees(cfg.sensors.tof_jitter_sigma)))
                ),
                flow_sigma=float(g("sensors.flow.sigma_mps", cfg.sensors.flow_sigma)),
                accel_sigma=float(g("sensors.accel.sigma_mps2", cfg.sensors.accel_sigma)),
            ),
            vision=VisionProxyParams(
                fov=float(g("vision.fov_rad", cfg.vision.fov)),
                d0=float(g("vision.d0_m", cfg.vision.d0)),
                slope=float(g("vision.slope_m", cfg.vision.slope)),
                noise_sigma=float(g("vision.noise_sigma", cfg.vision.noise_sigma)),
                false_positive_floor=float(
                    g("vision.false_positive_floor", cfg.vision.false_positive_floor)
                ),
            ),
            uwb=UwbChannelParams(
                range_noise_sigma=float(
                    g("uwb.range_noise_sigma_m", cfg.uwb.range_noise_sigma)
                ),
                loss_probability=float(
                    g("uwb.loss_probability", cfg.uwb.loss_probability)
                ),
            ),
            ekf=NoiseConfig(
                process_accel_sigma=float(
                    g("ekf.process_accel_sigma", cfg.ekf.process_accel_sigma)
                ),
                flow_meas_sigma=float(g("ekf.flow_sigma", cfg.ekf.flow_meas_sigma)),
                range_meas_sigma=float(g("ekf.range_sigma", cfg.ekf.range_meas_sigma)),
            ),
            isca_critical_m=float(g("policy.isca_critical_m", cfg.isca_critical_m)),
            isca_staleness_s=float(g("policy.isca_staleness_s", cfg.isca_staleness_s)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "MissionConfig":
        flat: Dict[str, object] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            flat[key] = value
        return cls.from_flat(flat)


class ConfigError(ValueError):
    """Invalid mission configuration (unknown key, bad value, unknown preset)."""
