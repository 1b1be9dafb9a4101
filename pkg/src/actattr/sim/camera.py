"""Pinhole rendering of box objects into pixel-space patches, and ray casting."""

from __future__ import annotations

import itertools
import math
from typing import Optional

import numpy as np

from actattr.geometry import BoundingBox, ImagePatch
from actattr.sim.world import CameraModel, SceneObject, World, camera_frame

NEAR = 1e-3

_SIGNS = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
# vertex index pairs that differ in exactly one sign, i.e. the 12 box edges
_EDGES = [(i, j) for i in range(8) for j in range(i + 1, 8) if np.sum(_SIGNS[i] != _SIGNS[j]) == 1]


def _camera_arrays(world: World, cam: Optional[CameraModel]):
    robot = world.robot
    if cam is not None and cam is not robot.camera:
        robot = type(robot)(pose=robot.pose, camera=cam, standoff=robot.standoff)
    origin, fwd, right, down = camera_frame(robot)
    return robot.camera, np.array(origin), np.array([fwd, right, down])


def _hull_pixels(pts_cam: np.ndarray, cam: CameraModel):
    """Pixel hull of camera-frame points (depth, right, down), clipped at the near plane."""
    depth = pts_cam[:, 0]
    front = depth > NEAR
    if front.all():
        keep = pts_cam
    else:
        kept = [pts_cam[front]]
        for i, j in _EDGES:
            di, dj = depth[i], depth[j]
            if (di > NEAR) != (dj > NEAR):
                t = (NEAR - di) / (dj - di)
                kept.append((pts_cam[i] + t * (pts_cam[j] - pts_cam[i]))[None, :])
        keep = np.concatenate(kept)
        keep = keep[keep[:, 0] >= NEAR * (1 - 1e-9)]
    cx, cy = cam.center
    u = cx + cam.focal * keep[:, 1] / keep[:, 0]
    v = cy + cam.focal * keep[:, 2] / keep[:, 0]
    return u.min(), v.min(), u.max(), v.max()


def project_object(obj: SceneObject, world: World, cam: Optional[CameraModel] = None) -> Optional[BoundingBox]:
    """Clipped pixel hull of one object, or None when it is not in view."""
    camera, origin, axes = _camera_arrays(world, cam)
    return _project(obj, camera, origin, axes)


def _project(obj: SceneObject, camera: CameraModel, origin, axes) -> Optional[BoundingBox]:
    center = np.asarray(obj.center)
    if (axes[0] @ (center - origin)) <= NEAR:
        return None
    corners = center + _SIGNS * np.asarray(obj.extent)
    pts = (corners - origin) @ axes.T
    u0, v0, u1, v1 = _hull_pixels(pts, camera)
    x0, y0 = max(u0, 0.0), max(v0, 0.0)
    x1, y1 = min(u1, float(camera.width)), min(v1, float(camera.height))
    if not (x0 < x1 and y0 < y1):
        return None
    return BoundingBox(float(x0), float(y0), float(x1), float(y1))


def project(world: World, cam: Optional[CameraModel] = None) -> list[ImagePatch]:
    """Render every resting object whose center lies in front of the camera.

    Each object's 8 corners go through the pinhole model; the axis-aligned
    hull is clipped to the frame and empty hulls are dropped. Patches carry
    the ground-truth object id and confidence 1.0.
    """
    camera, origin, axes = _camera_arrays(world, cam)
    out = []
    for obj in world.free_objects():
        box = _project(obj, camera, origin, axes)
        if box is not None:
            out.append(ImagePatch(box, obj.name, 1.0, world.frame_id, obj.id))
    return out


def _slab(origin: float, direction: float, lo: float, hi: float) -> tuple[float, float]:
    if abs(direction) < 1e-15:
        if lo <= origin <= hi:
            return -math.inf, math.inf
        return math.inf, -math.inf
    t0 = (lo - origin) / direction
    t1 = (hi - origin) / direction
    return (t0, t1) if t0 <= t1 else (t1, t0)


def ray_box(origin, direction, lo, hi) -> Optional[float]:
    """Distance along a unit ray to an axis-aligned box, or None on a miss."""
    t_near, t_far = -math.inf, math.inf
    for o, d, a, b in zip(origin, direction, lo, hi):
        t0, t1 = _slab(o, d, a, b)
        t_near, t_far = max(t_near, t0), min(t_far, t1)
        if t_near > t_far:
            return None
    if t_far < 0:
        return None
    return max(t_near, 0.0)


def ray_cast(world: World) -> Optional[tuple[float, str]]:
    """Nearest resting object hit by the camera's optical axis."""
    origin, fwd, _, _ = camera_frame(world.robot)
    best = None
    for obj in world.free_objects():
        t = ray_box(origin, fwd, obj.lo, obj.hi)
        if t is not None and (best is None or t < best[0]):
            best = (t, obj.id)
    return best
