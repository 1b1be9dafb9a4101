"""Deterministic stepped world with oracle perception and robot sensors."""

from actattr.sim.camera import project, ray_cast
from actattr.sim.oracles import (
    KnowledgeBase,
    NoiseProfile,
    VqaQuestion,
    detector_rng,
    distance_probe,
    oracle_find,
    oracle_language_query,
    oracle_vqa,
    weight_probe,
)
from actattr.sim.world import (
    FLOOR,
    CameraModel,
    CameraPose,
    Limits,
    Robot,
    SceneObject,
    VelocityCommand,
    World,
    load_scene,
    step,
    world_from_dict,
    world_to_dict,
)

__all__ = [
    "FLOOR", "CameraModel", "CameraPose", "KnowledgeBase", "Limits", "NoiseProfile", "Robot",
    "SceneObject", "VelocityCommand", "VqaQuestion", "World", "detector_rng", "distance_probe",
    "load_scene", "oracle_find", "oracle_language_query", "oracle_vqa", "project", "ray_cast",
    "step", "weight_probe", "world_from_dict", "world_to_dict",
]
