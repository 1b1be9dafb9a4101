"""Robot actions, servo policies and their configuration."""

from actattr.control.config import ControllerConfig, PoseGains, default_config, load_config
from actattr.control.pid import PidGains, PidState, pid_step
from actattr.control.robot import (
    ControlOutcome,
    EpisodeTrace,
    PlacementBlocked,
    focus_on_patch,
    go_to_object,
    go_to_pose,
    lateral_error,
    measure_distance,
    measure_weight,
    pick_up,
    put_on,
)
from actattr.control.tracker import track_patch
from actattr.sim.world import Robot

__all__ = [
    "ControlOutcome", "ControllerConfig", "EpisodeTrace", "PidGains", "PidState", "PlacementBlocked",
    "PoseGains", "Robot", "default_config", "focus_on_patch", "go_to_object", "go_to_pose",
    "lateral_error", "load_config", "measure_distance", "measure_weight", "pick_up", "pid_step",
    "put_on", "track_patch",
]
