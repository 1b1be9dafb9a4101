"""In-process environment: binds the environment primitives to a World.

An environment exposes ``call(name, args) -> (value, note)``. ``note`` is a
small JSON-safe dict (or None) with side information for the trace, such as
names the knowledge base did not know. The bridged client implements the
same interface, so the interpreter cannot tell the two apart.
"""

from __future__ import annotations

from typing import Optional

from actattr.control import robot as actions
from actattr.control.config import ControllerConfig, default_config
from actattr.errors import TooFar
from actattr.geometry import ImagePatch
from actattr.lang.primitives import ENV_PRIMITIVES
from actattr.sim.camera import ray_cast
from actattr.sim.oracles import (
    KnowledgeBase,
    NoiseProfile,
    VqaQuestion,
    oracle_find,
    oracle_language_query,
    oracle_vqa,
    parse_weight_question,
)
from actattr.sim.world import World


def _text(value, what: str) -> str:
    if not isinstance(value, str):
        raise TypeError(f"{what} must be text, got {type(value).__name__}")
    return value


def _patch(value) -> ImagePatch:
    if not isinstance(value, ImagePatch):
        raise TypeError(f"expected a patch, got {type(value).__name__}")
    return value


class LocalEnv:
    """Primitives executed directly against an owned World."""

    def __init__(
        self,
        world: World,
        noise: Optional[NoiseProfile] = None,
        kb: Optional[KnowledgeBase] = None,
        config: Optional[ControllerConfig] = None,
    ):
        self.world = world
        self.noise = noise or NoiseProfile()
        self.kb = kb or KnowledgeBase.bundled()
        self.config = config or default_config()

    @property
    def frame_id(self) -> int:
        return self.world.frame_id

    def call(self, name: str, args: list):
        if name not in ENV_PRIMITIVES:
            raise KeyError(f"{name} is not an environment primitive")
        return getattr(self, "_" + name)(*args)

    # perception
    def _find(self, label):
        return oracle_find(self.world, None, _text(label, "label"), self.noise), None

    def _visual_query(self, question, patch=None):
        q = VqaQuestion.from_text(_text(question, "question"), None if patch is None else _patch(patch))
        return oracle_vqa(self.world, None, q), None

    def _language_query(self, question):
        answer = oracle_language_query(_text(question, "question"), self.kb)
        _, items = parse_weight_question(question)
        unknown = [i for i in items if not self.kb.knows(i)]
        return answer, ({"unknown_names": unknown} if unknown else None)

    def _image_center(self):
        return list(self.world.robot.camera.center), None

    # sensing
    def _get_pose(self):
        return list(self.world.robot.pose), None

    def _measure_weight(self):
        return actions.measure_weight(self.world), None

    # actions
    def _go_to_object(self, patch):
        return actions.go_to_object(self.world, _patch(patch), self.config).summary(), None

    def _focus_on_patch(self, patch):
        return actions.focus_on_patch(self.world, _patch(patch), self.config).summary(), None

    def _measure_distance(self, patch):
        return actions.measure_distance(self.world, _patch(patch), self.config), None

    def _pick_up(self, patch):
        target = _patch(patch).object_id
        if target is None:
            # a merged or unattributed box: grasp whatever is in front
            hit = ray_cast(self.world)
            if hit is None:
                raise TooFar("nothing in front of the gripper")
            target = hit[1]
        actions.pick_up(self.world, target, self.config)
        return None, {"object_id": target}

    def _put_on(self, surface):
        actions.put_on(self.world, _text(surface, "surface"), self.config)
        return None, None

    def _go_to_pose(self, pose):
        if not isinstance(pose, list) or len(pose) != 3:
            raise TypeError("pose must be [x, y, theta]")
        return actions.go_to_pose(self.world, pose, self.config).summary(), None
