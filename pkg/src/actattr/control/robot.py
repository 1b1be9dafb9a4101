"""Robot actions with precondition checks, and the servo policies behind them.

Every function works on ``world.robot`` and mutates the world in place.
Lateral alignment is image-based (patch centroid vs. frame center);
longitudinal approach uses the forward distance sensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from actattr.control.config import ControllerConfig, default_config
from actattr.control.pid import PidState, pid_step
from actattr.control.tracker import track_patch
from actattr.errors import (
    AlreadyHolding,
    ConvergenceFailure,
    NotGraspable,
    NotHolding,
    SceneError,
    TooFar,
)
from actattr.geometry import ImagePatch
from actattr.sim.camera import project, ray_cast
from actattr.sim.oracles import distance_probe, weight_probe
from actattr.sim.world import FLOOR, VelocityCommand, World, camera_frame, carry_held, step


class PlacementBlocked(SceneError):
    pass


@dataclass
class EpisodeTrace:
    """Append-only log of primitive calls, readings and issued commands."""

    entries: list[dict] = field(default_factory=list)

    def append(
        self, primitive: str, arguments: Any = None, readings: Any = None, command: Any = None, note: Any = None
    ) -> dict:
        entry = {
            "step": len(self.entries) + 1,
            "primitive": primitive,
            "arguments": arguments if arguments is not None else [],
            "readings": readings,
            "command": command,
        }
        if note is not None:
            entry["note"] = note
        self.entries.append(entry)
        return entry

    def count(self, primitive: str) -> int:
        return sum(1 for e in self.entries if e["primitive"] == primitive)

    def names(self) -> list[str]:
        return [e["primitive"] for e in self.entries]

    def to_list(self) -> list[dict]:
        return list(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass
class ControlOutcome:
    steps: int = 0
    clamped_steps: int = 0
    lateral_error: Optional[float] = None
    distance: Optional[float] = None
    patch: Optional[ImagePatch] = None

    def summary(self) -> dict:
        return {
            "steps": self.steps,
            "clamped_steps": self.clamped_steps,
            "lateral_error": self.lateral_error,
            "distance": self.distance,
        }


def lateral_error(world: World, patch: ImagePatch) -> float:
    """Signed pixel offset of the patch centroid from the frame center (positive = right)."""
    return patch.centroid[0] - world.robot.camera.width / 2


def _reacquire(world: World, prev: ImagePatch) -> ImagePatch:
    return track_patch(prev, project(world))


def _lateral_command(cfg: ControllerConfig, error: float, state: PidState, dt: float):
    if cfg.lateral_mode == "rotate":
        u, state = pid_step(cfg.rotation, error, state, dt)
        return VelocityCommand(omega=-u), state
    u, state = pid_step(cfg.lateral, error, state, dt)
    return VelocityCommand(vy=-u), state


def _lateral_tolerance(cfg: ControllerConfig) -> float:
    return (cfg.rotation if cfg.lateral_mode == "rotate" else cfg.lateral).tolerance


def focus_on_patch(world: World, patch: ImagePatch, config: Optional[ControllerConfig] = None) -> ControlOutcome:
    """Servo until the patch centroid sits on the frame's vertical center line.

    The patch is re-associated on every new frame. Raises ``TargetLost`` when
    the tracker drops it and ``ConvergenceFailure`` after ``max_steps``.
    """
    cfg = config or default_config()
    gains = cfg.rotation if cfg.lateral_mode == "rotate" else cfg.lateral
    dt = world.time_step
    out = ControlOutcome()
    state = PidState()
    current = _reacquire(world, patch)
    while True:
        err = lateral_error(world, current)
        if abs(err) <= gains.tolerance:
            out.lateral_error, out.patch = err, current
            return out
        if out.steps >= gains.max_steps:
            raise ConvergenceFailure(f"focus did not converge in {gains.max_steps} steps (error {err:.2f} px)")
        cmd, state = _lateral_command(cfg, err, state, dt)
        step(world, cmd, dt, cfg.limits)
        out.steps += 1
        out.clamped_steps += world.last_clamped
        current = _reacquire(world, current)


def go_to_object(world: World, patch: ImagePatch, config: Optional[ControllerConfig] = None) -> ControlOutcome:
    """Align on the patch, then drive to the grasp standoff.

    Longitudinal error is the distance reading minus the standoff. Lateral
    correction resumes whenever the pixel error exceeds twice its tolerance,
    and must be within tolerance at the end. Occluders are not compensated:
    the sensor reports whatever the optical axis hits first.
    """
    cfg = config or default_config()
    focus = focus_on_patch(world, patch, cfg)
    lat_tol = _lateral_tolerance(cfg)
    lon = cfg.longitudinal
    dt = world.time_step
    out = ControlOutcome(steps=focus.steps, clamped_steps=focus.clamped_steps)
    current = focus.patch
    lat_state, lon_state = PidState(), PidState()
    approach_steps = 0
    while True:
        err_u = lateral_error(world, current)
        err_d = distance_probe(world) - world.robot.standoff
        if abs(err_d) <= lon.tolerance and abs(err_u) <= lat_tol:
            out.lateral_error, out.distance, out.patch = err_u, err_d + world.robot.standoff, current
            return out
        if approach_steps >= lon.max_steps:
            raise ConvergenceFailure(
                f"approach did not converge in {lon.max_steps} steps (distance error {err_d:.3f} m, {err_u:.2f} px)"
            )
        vx, lon_state = pid_step(lon, err_d, lon_state, dt)
        if abs(err_u) > 2 * lat_tol or (abs(err_d) <= lon.tolerance and abs(err_u) > lat_tol):
            lat_cmd, lat_state = _lateral_command(cfg, err_u, lat_state, dt)
        else:
            lat_cmd, lat_state = VelocityCommand(), PidState()
        step(world, VelocityCommand(vx=vx, vy=lat_cmd.vy, omega=lat_cmd.omega), dt, cfg.limits)
        approach_steps += 1
        out.steps += 1
        out.clamped_steps += world.last_clamped
        current = _reacquire(world, current)


def go_to_pose(world: World, target, config: Optional[ControllerConfig] = None) -> ControlOutcome:
    """Drive the base back to a recorded pose ``(x, y, theta)``."""
    cfg = config or default_config()
    g = cfg.pose
    dt = world.time_step
    out = ControlOutcome()
    tx, ty, tt = (float(v) for v in target)
    while True:
        x, y, theta = world.robot.pose
        dx, dy = tx - x, ty - y
        dth = math.atan2(math.sin(tt - theta), math.cos(tt - theta))
        if math.hypot(dx, dy) <= g.tolerance_position and abs(dth) <= g.tolerance_angle:
            return out
        if out.steps >= g.max_steps:
            raise ConvergenceFailure(f"go_to_pose did not converge in {g.max_steps} steps")
        c, s = math.cos(theta), math.sin(theta)
        cmd = VelocityCommand(
            vx=g.kp_linear * (dx * c + dy * s),
            vy=g.kp_linear * (-dx * s + dy * c),
            omega=g.kp_angular * dth,
        )
        step(world, cmd, dt, cfg.limits)
        out.steps += 1
        out.clamped_steps += world.last_clamped


def measure_distance(world: World, patch: ImagePatch, config: Optional[ControllerConfig] = None) -> float:
    """Focus on the patch, then read the forward distance sensor."""
    focus_on_patch(world, patch, config)
    return distance_probe(world)


def _reach_tolerance(config: Optional[ControllerConfig]) -> float:
    return (config or default_config()).longitudinal.tolerance


def pick_up(world: World, object_id: str, config: Optional[ControllerConfig] = None) -> None:
    """Grasp an object.

    Preconditions, mirroring how the API documents its own use::

        go_to_object(patch)      # distance reading now within standoff + tolerance
        pick_up(patch)           # hands must be free, object graspable

    Raises ``AlreadyHolding``, ``NotGraspable`` or ``TooFar``.
    """
    robot = world.robot
    if robot.holding is not None:
        raise AlreadyHolding(f"already holding {robot.holding}")
    obj = world.object(object_id)
    if not obj.graspable:
        raise NotGraspable(f"{object_id} cannot be grasped")
    hit = ray_cast(world)
    reach = robot.standoff + _reach_tolerance(config)
    if hit is None or hit[1] != object_id or hit[0] > reach:
        seen = "nothing" if hit is None else f"{hit[1]} at {hit[0]:.3f} m"
        raise TooFar(f"{object_id} is not within {reach:.3f} m in front of the gripper (sensor sees {seen})")
    robot.holding = object_id
    carry_held(world)
    world.frame_id += 1


def _forward_extent(extent, heading: float) -> float:
    return abs(math.cos(heading)) * extent[0] + abs(math.sin(heading)) * extent[1]


def put_on(world: World, surface_id: str, config: Optional[ControllerConfig] = None) -> None:
    """Place the held object on a surface's top face in front of the gripper.

    ``surface_id`` is an object id or ``"floor"`` for the ground plane. A
    surface object must be what the distance sensor sees, within reach.
    """
    robot = world.robot
    if robot.holding is None:
        raise NotHolding("nothing to put down")
    held = world.object(robot.holding)
    origin, fwd, _, _ = camera_frame(robot)
    heading = math.atan2(fwd[1], fwd[0])
    ahead = robot.standoff + _forward_extent(held.extent, heading)
    if surface_id == FLOOR:
        x, y = origin[0] + fwd[0] * ahead, origin[1] + fwd[1] * ahead
        z = held.extent[2]
    else:
        surface = world.object(surface_id)
        hit = ray_cast(world)
        reach = robot.standoff + _reach_tolerance(config)
        if hit is None or hit[1] != surface_id or hit[0] > reach:
            raise TooFar(f"surface {surface_id} is not within {reach:.3f} m")
        x, y = origin[0] + fwd[0] * ahead, origin[1] + fwd[1] * ahead
        (lx, ly, _), (hx, hy, top) = surface.lo, surface.hi
        ex, ey = held.extent[0], held.extent[1]
        x = min(max(x, lx + ex), hx - ex) if hx - lx > 2 * ex else (lx + hx) / 2
        y = min(max(y, ly + ey), hy - ey) if hy - ly > 2 * ey else (ly + hy) / 2
        z = top + held.extent[2]
    previous = held.center
    held.center = (x, y, z)
    for other in world.free_objects():
        if other.id != held.id and held.overlaps(other):
            held.center = previous
            raise PlacementBlocked(f"placing {held.id} would collide with {other.id}")
    robot.holding = None
    world.frame_id += 1


def measure_weight(world: World) -> float:
    """Force/torque reading of the held object; requires a prior pick_up."""
    return weight_probe(world)
