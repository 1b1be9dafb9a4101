"""World state: axis-aligned box objects, a holonomic robot and its camera.

World frame is metric, z up. A robot pose is ``(x, y, theta)`` with heading
``(cos theta, sin theta)``. Velocity commands are in the body frame:
``vx`` forward, ``vy`` to the left, ``omega`` counter-clockwise.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from actattr.errors import SceneError

FLOOR = "floor"


@dataclass
class SceneObject:
    id: str
    name: str
    center: tuple[float, float, float]
    extent: tuple[float, float, float]
    mass: float
    graspable: bool = True

    def __post_init__(self):
        self.center = tuple(float(c) for c in self.center)
        self.extent = tuple(float(e) for e in self.extent)
        if len(self.center) != 3 or len(self.extent) != 3:
            raise SceneError(f"{self.id}: center and extent need 3 components")
        if min(self.extent) <= 0:
            raise SceneError(f"{self.id}: extents must be positive")
        if not self.mass > 0:
            raise SceneError(f"{self.id}: mass must be positive")

    @property
    def lo(self) -> tuple[float, float, float]:
        return tuple(c - e for c, e in zip(self.center, self.extent))

    @property
    def hi(self) -> tuple[float, float, float]:
        return tuple(c + e for c, e in zip(self.center, self.extent))

    def overlaps(self, other: "SceneObject") -> bool:
        return all(a_lo < b_hi and b_lo < a_hi for a_lo, a_hi, b_lo, b_hi in zip(self.lo, self.hi, other.lo, other.hi))


@dataclass(frozen=True)
class CameraPose:
    """Camera mount relative to the robot body: offset (forward, left, up) and yaw/pitch."""

    xyz: tuple[float, float, float] = (0.0, 0.0, 0.1)
    yaw: float = 0.0
    pitch: float = 0.0


@dataclass(frozen=True)
class CameraModel:
    focal: float = 277.0
    width: int = 320
    height: int = 240
    pose: CameraPose = field(default_factory=CameraPose)

    def __post_init__(self):
        if not self.focal > 0 or self.width <= 0 or self.height <= 0:
            raise SceneError("camera needs positive focal length and frame size")

    @property
    def center(self) -> tuple[float, float]:
        return (self.width / 2, self.height / 2)


@dataclass
class Robot:
    pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    holding: Optional[str] = None
    standoff: float = 0.25
    camera: CameraModel = field(default_factory=CameraModel)
    radius: float = 0.1
    weight_sigma: float = 0.0

    def __post_init__(self):
        self.pose = tuple(float(p) for p in self.pose)
        if not self.standoff > 0:
            raise SceneError("standoff must be positive")


@dataclass(frozen=True)
class VelocityCommand:
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class Limits:
    linear: float = 0.5
    angular: float = 1.0


@dataclass
class World:
    objects: list[SceneObject]
    robot: Robot = field(default_factory=Robot)
    rng_seed: int = 0
    time_step: float = 0.1
    frame_id: int = 0
    last_clamped: bool = False

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise SceneError("object ids must be unique")
        if FLOOR in ids:
            raise SceneError(f"{FLOOR!r} is reserved for the ground plane")
        resting = [o for o in self.objects if o.id != self.robot.holding]
        for i, a in enumerate(resting):
            for b in resting[i + 1:]:
                if a.overlaps(b):
                    raise SceneError(f"objects {a.id} and {b.id} interpenetrate")
        if self.robot.holding is not None and self.robot.holding not in ids:
            raise SceneError(f"robot holds unknown object {self.robot.holding}")

    def object(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)

    def free_objects(self) -> list[SceneObject]:
        """Objects resting in the scene, i.e. everything not in the gripper."""
        return [o for o in self.objects if o.id != self.robot.holding]

    def copy(self) -> "World":
        return copy.deepcopy(self)

    def state_hash(self) -> str:
        blob = json.dumps(world_to_dict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def camera_frame(robot: Robot):
    """Camera origin and (forward, right, down) unit axes in world coordinates."""
    x, y, theta = robot.pose
    cam = robot.camera.pose
    fwd_off, left_off, up_off = cam.xyz
    c, s = math.cos(theta), math.sin(theta)
    origin = (x + fwd_off * c - left_off * s, y + fwd_off * s + left_off * c, up_off)
    psi = theta + cam.yaw
    phi = cam.pitch
    cp, sp = math.cos(psi), math.sin(psi)
    forward = (cp * math.cos(phi), sp * math.cos(phi), math.sin(phi))
    right = (sp, -cp, 0.0)
    down = (cp * math.sin(phi), sp * math.sin(phi), -math.cos(phi))
    return origin, forward, right, down


def _clamp(value: float, limit: float) -> tuple[float, bool]:
    if value > limit:
        return limit, True
    if value < -limit:
        return -limit, True
    return value, False


def _blocked(world: World, x: float, y: float) -> bool:
    r = world.robot.radius
    for o in world.free_objects():
        (lx, ly, _), (hx, hy, _) = o.lo, o.hi
        if lx - r < x < hx + r and ly - r < y < hy + r:
            return True
    return False


def carry_held(world: World) -> None:
    """Keep the held object above the robot so its state follows the gripper."""
    held = world.robot.holding
    if held is None:
        return
    obj = world.object(held)
    x, y, _ = world.robot.pose
    obj.center = (x, y, obj.center[2])


def step(world: World, cmd: VelocityCommand, dt: float, limits: Limits = Limits()) -> World:
    """Integrate one kinematic step in place and return the world.

    Commands beyond ``limits`` are clamped and motion into an object footprint
    is stopped per axis; either sets ``world.last_clamped``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    vx, cx = _clamp(cmd.vx, limits.linear)
    vy, cy = _clamp(cmd.vy, limits.linear)
    om, co = _clamp(cmd.omega, limits.angular)
    clamped = cx or cy or co
    x, y, theta = world.robot.pose
    c, s = math.cos(theta), math.sin(theta)
    nx = x + (vx * c - vy * s) * dt
    ny = y + (vx * s + vy * c) * dt
    if (nx, ny) != (x, y) and _blocked(world, nx, ny):
        clamped = True
        if not _blocked(world, nx, y):
            ny = y
        elif not _blocked(world, x, ny):
            nx = x
        else:
            nx, ny = x, y
    world.robot.pose = (nx, ny, theta + om * dt)
    world.frame_id += 1
    world.last_clamped = clamped
    carry_held(world)
    return world


# -- scene files -----------------------------------------------------------

def camera_to_dict(cam: CameraModel) -> dict:
    return {
        "focal": cam.focal,
        "width": cam.width,
        "height": cam.height,
        "pose": {"xyz": list(cam.pose.xyz), "yaw": cam.pose.yaw, "pitch": cam.pose.pitch},
    }


def camera_from_dict(d: dict) -> CameraModel:
    pose = d.get("pose") or {}
    return CameraModel(
        focal=float(d.get("focal", 277.0)),
        width=int(d.get("width", 320)),
        height=int(d.get("height", 240)),
        pose=CameraPose(
            xyz=tuple(float(v) for v in pose.get("xyz", (0.0, 0.0, 0.1))),
            yaw=float(pose.get("yaw", 0.0)),
            pitch=float(pose.get("pitch", 0.0)),
        ),
    )


def world_to_dict(world: World) -> dict:
    r = world.robot
    return {
        "seed": world.rng_seed,
        "time_step": world.time_step,
        "frame_id": world.frame_id,
        "camera": camera_to_dict(r.camera),
        "objects": [
            {
                "id": o.id,
                "name": o.name,
                "center": list(o.center),
                "extent": list(o.extent),
                "mass": o.mass,
                "graspable": o.graspable,
            }
            for o in world.objects
        ],
        "robot": {
            "pose": list(r.pose),
            "holding": r.holding,
            "standoff": r.standoff,
            "radius": r.radius,
            "weight_sigma": r.weight_sigma,
        },
    }


def world_from_dict(d: dict) -> World:
    try:
        rd = d.get("robot") or {}
        robot = Robot(
            pose=tuple(rd.get("pose", (0.0, 0.0, 0.0))),
            holding=rd.get("holding"),
            standoff=float(rd.get("standoff", 0.25)),
            camera=camera_from_dict(d.get("camera") or {}),
            radius=float(rd.get("radius", 0.1)),
            weight_sigma=float(rd.get("weight_sigma", 0.0)),
        )
        objects = [
            SceneObject(
                id=str(o["id"]),
                name=str(o["name"]),
                center=tuple(o["center"]),
                extent=tuple(o["extent"]),
                mass=float(o["mass"]),
                graspable=bool(o.get("graspable", True)),
            )
            for o in d.get("objects", [])
        ]
        return World(
            objects=objects,
            robot=robot,
            rng_seed=int(d.get("seed", 0)),
            time_step=float(d.get("time_step", 0.1)),
            frame_id=int(d.get("frame_id", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise SceneError(f"malformed scene: {exc}") from exc


def load_scene(path: str | Path) -> World:
    return world_from_dict(json.loads(Path(path).read_text()))
