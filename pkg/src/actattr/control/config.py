"""Controller configuration: gains, tolerances, limits and the grasp standoff."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from actattr.control.pid import PidGains
from actattr.sim.world import Limits

CONFIG_ENV = "ACTATTR_CONFIG"


@dataclass(frozen=True)
class PoseGains:
    kp_linear: float = 2.0
    kp_angular: float = 2.0
    tolerance_position: float = 0.005
    tolerance_angle: float = 0.01
    max_steps: int = 500


@dataclass(frozen=True)
class ControllerConfig:
    lateral: PidGains = field(default_factory=lambda: PidGains(kp=0.012, tolerance=2.0))
    longitudinal: PidGains = field(default_factory=lambda: PidGains(kp=4.0, tolerance=0.01))
    rotation: PidGains = field(default_factory=lambda: PidGains(kp=0.02, tolerance=2.0))
    pose: PoseGains = field(default_factory=PoseGains)
    standoff: float = 0.25
    lateral_mode: str = "strafe"
    limits: Limits = field(default_factory=Limits)

    def __post_init__(self):
        if self.lateral_mode not in ("strafe", "rotate"):
            raise ValueError(f"lateral_mode must be 'strafe' or 'rotate', not {self.lateral_mode!r}")
        if not self.standoff > 0:
            raise ValueError("standoff must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerConfig":
        base = cls()
        kw = {}
        for name in ("lateral", "longitudinal", "rotation"):
            if name in d:
                kw[name] = replace(getattr(base, name), **d[name])
        if "pose" in d:
            kw["pose"] = replace(base.pose, **d["pose"])
        if "limits" in d:
            kw["limits"] = replace(base.limits, **d["limits"])
        for name in ("standoff", "lateral_mode"):
            if name in d:
                kw[name] = d[name]
        return replace(base, **kw)

    @classmethod
    def load(cls, path: str | Path) -> "ControllerConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def default_config() -> ControllerConfig:
    """Shipped defaults, or the file named by ``ACTATTR_CONFIG`` when set."""
    override = os.environ.get(CONFIG_ENV)
    if override:
        return ControllerConfig.load(override)
    text = resources.files("actattr.data").joinpath("controller.json").read_text()
    return ControllerConfig.from_dict(json.loads(text))


def load_config(path: Optional[str | Path] = None) -> ControllerConfig:
    return ControllerConfig.load(path) if path else default_config()
