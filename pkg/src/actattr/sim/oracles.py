"""Ground-truth stand-ins for the detector, the VQA model, the language model
and the robot's distance and force sensors."""

from __future__ import annotations

import json
import re
import zlib
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from actattr.errors import (
    EmptyItemList,
    InvalidBox,
    MalformedQuestion,
    NoReading,
    NotHolding,
    UnsupportedQuestion,
)
from actattr.geometry import BoundingBox, ImagePatch, area, hull, iou
from actattr.sim.camera import project, ray_cast
from actattr.sim.world import CameraModel, World

GENERIC_NOUNS = ("object", "objects", "item", "items", "thing", "things")


@dataclass(frozen=True)
class NoiseProfile:
    miss_rate: float = 0.0
    merge_rate: float = 0.0
    jitter_sigma: float = 0.0
    mislabel_rate: float = 0.0

    def __post_init__(self):
        for name in ("miss_rate", "merge_rate", "mislabel_rate"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0 and not (name == "miss_rate" and value == 1.0):
                raise ValueError(f"{name}={value} outside [0, 1)")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be >= 0")

    @classmethod
    def zero(cls) -> "NoiseProfile":
        return cls()

    @classmethod
    def calibrated(cls) -> "NoiseProfile":
        """Detector noise used for the baseline-ordering experiments (bundled file)."""
        text = resources.files("actattr.data").joinpath("noise_default.json").read_text()
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseProfile":
        return cls(**{k: float(d[k]) for k in ("miss_rate", "merge_rate", "jitter_sigma", "mislabel_rate") if k in d})

    @classmethod
    def load(cls, path: str | Path) -> "NoiseProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def is_zero(self) -> bool:
        return self == NoiseProfile()


class KnowledgeBase:
    """Flat name -> mass (kg) table with a fallback for unknown names."""

    def __init__(self, masses: dict[str, float], default: float = 1.0):
        self.masses = {k.strip().lower(): float(v) for k, v in masses.items()}
        self.default = float(default)

    @classmethod
    def from_dict(cls, d: dict) -> "KnowledgeBase":
        d = dict(d)
        default = d.pop("__default__", 1.0)
        return cls(d, default)

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def bundled(cls) -> "KnowledgeBase":
        text = resources.files("actattr.data").joinpath("kb.json").read_text()
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {**self.masses, "__default__": self.default}

    def knows(self, name: str) -> bool:
        return name.strip().lower() in self.masses

    def mass(self, name: str) -> float:
        return self.masses.get(name.strip().lower(), self.default)

    def __len__(self):
        return len(self.masses)


def detector_rng(world: World, label: str) -> np.random.Generator:
    """Noise stream for one detector call.

    Keyed on (scene seed, frame, prompt) so a detector queried twice with the
    same prompt on the same frame answers identically, like a real model.
    """
    return np.random.default_rng([world.rng_seed & 0xFFFFFFFF, world.frame_id, zlib.crc32(label.encode())])


def _matches(label: str, name: str) -> bool:
    label, name = label.strip().lower(), name.strip().lower()
    return bool(label) and (name in label or label in name)


def _is_generic(label: str) -> bool:
    words = re.findall(r"[a-z]+", label.lower())
    return any(w in GENERIC_NOUNS for w in words)


def oracle_find(
    world: World,
    cam: Optional[CameraModel],
    label: str,
    noise: NoiseProfile = NoiseProfile(),
    rng: Optional[np.random.Generator] = None,
) -> list[ImagePatch]:
    """Detector stand-in: rendered patches whose object name matches ``label``.

    Names match by case-insensitive substring in either direction. A label
    naming no visible object but built on a generic noun ("a heavy object")
    matches every visible object; since the adjective carries no visual
    evidence, confidence then reflects apparent size relative to the largest
    match. Noise is applied in order: misses, a merge of all matches into
    their hull, coordinate jitter, mislabels.
    """
    if not label or not label.strip():
        raise ValueError("label must be non-empty")
    cam = cam or world.robot.camera
    if rng is None:
        rng = detector_rng(world, label)
    visible = project(world, cam)
    found = [p for p in visible if _matches(label, p.label)]
    if not found and _is_generic(label) and visible:
        biggest = max(area(p.bbox) for p in visible)
        found = [
            ImagePatch(p.bbox, p.label, area(p.bbox) / biggest, p.frame_id, p.object_id) for p in visible
        ]
    found = [ImagePatch(p.bbox, label, p.confidence, p.frame_id, p.object_id) for p in found]

    if noise.miss_rate > 0:
        found = [p for p in found if rng.random() >= noise.miss_rate]
    if noise.merge_rate > 0 and len(found) > 1 and rng.random() < noise.merge_rate:
        merged = hull([p.bbox for p in found])
        conf = max(p.confidence for p in found)
        found = [ImagePatch(merged, label, conf, world.frame_id, None)]
    if noise.jitter_sigma > 0:
        found = [q for q in (_jitter(p, noise.jitter_sigma, cam, rng) for p in found) if q is not None]
    if noise.mislabel_rate > 0:
        found = [_mislabel(p, visible, noise.mislabel_rate, label, rng) for p in found]
    return found


def _jitter(p: ImagePatch, sigma: float, cam: CameraModel, rng) -> Optional[ImagePatch]:
    x0, y0, x1, y1 = np.asarray(p.bbox.as_tuple()) + rng.normal(0.0, sigma, 4)
    x0, x1 = sorted((x0, x1))
    y0, y1 = sorted((y0, y1))
    x0, y0 = max(x0, 0.0), max(y0, 0.0)
    x1, y1 = min(x1, float(cam.width)), min(y1, float(cam.height))
    try:
        box = BoundingBox(float(x0), float(y0), float(x1), float(y1))
    except InvalidBox:
        return None
    return ImagePatch(box, p.label, p.confidence, p.frame_id, p.object_id)


def _mislabel(p: ImagePatch, visible: list[ImagePatch], rate: float, label: str, rng) -> ImagePatch:
    if rng.random() >= rate:
        return p
    others = [q for q in visible if q.object_id != p.object_id]
    if not others:
        return p
    q = others[int(rng.integers(len(others)))]
    return ImagePatch(q.bbox, label, p.confidence, q.frame_id, q.object_id)


@dataclass(frozen=True)
class VqaQuestion:
    kind: str
    patch: Optional[ImagePatch] = None

    LIST_PHRASES = ("list_items", "list items", "what objects are in the image", "what items are in the image",
                    "what is in the image", "list the objects", "list the items")

    @classmethod
    def from_text(cls, question: str, patch: Optional[ImagePatch] = None) -> "VqaQuestion":
        if patch is not None:
            return cls("name_of_patch", patch)
        q = question.strip().lower().rstrip("?").strip()
        if q in cls.LIST_PHRASES:
            return cls("list_items")
        raise UnsupportedQuestion(f"unsupported visual question {question!r}")


def oracle_vqa(world: World, cam: Optional[CameraModel], question: VqaQuestion) -> str:
    """VQA stand-in answering either "list the items" or "what is this patch"."""
    cam = cam or world.robot.camera
    visible = project(world, cam)
    if question.kind == "list_items":
        ordered = sorted(visible, key=lambda p: (p.centroid[0], p.object_id or ""))
        return ", ".join(p.label for p in ordered)
    if question.kind == "name_of_patch" and question.patch is not None:
        best, best_iou = "", 0.0
        for p in visible:
            score = iou(p.bbox, question.patch.bbox)
            if score > best_iou:
                best, best_iou = p.label, score
        return best
    raise UnsupportedQuestion(f"unsupported visual question kind {question.kind!r}")


_WEIGHT_Q = re.compile(
    r"^\s*out of these items,\s*which one is more likely to be the (heaviest|lightest) one\?(.*)$",
    re.IGNORECASE | re.DOTALL,
)


def weight_question(direction: str, items: str) -> str:
    return f"Out of these items, which one is more likely to be the {direction} one? {items}"


def parse_weight_question(question: str) -> tuple[str, list[str]]:
    m = _WEIGHT_Q.match(question)
    if not m:
        raise MalformedQuestion(f"not a weight comparison question: {question!r}")
    body = m.group(2).strip().strip("[]{}").strip()
    items = [s.strip() for s in body.split(",") if s.strip()]
    if not items:
        raise EmptyItemList("question lists no items")
    return m.group(1).lower(), items


def oracle_language_query(question: str, kb: KnowledgeBase) -> str:
    """Language-model stand-in: pick the heaviest or lightest listed item by KB mass."""
    direction, items = parse_weight_question(question)
    sign = 1.0 if direction == "heaviest" else -1.0
    best = items[0]
    for item in items[1:]:
        if sign * kb.mass(item) > sign * kb.mass(best):
            best = item
    return best


def distance_probe(world: World, cam: Optional[CameraModel] = None) -> float:
    """Range along the optical axis to the nearest object surface."""
    hit = ray_cast(world)
    if hit is None:
        raise NoReading("distance sensor sees nothing")
    return hit[0]


def weight_probe(world: World, sigma: Optional[float] = None, rng: Optional[np.random.Generator] = None) -> float:
    """Force/torque reading of the held object's mass in kg."""
    held = world.robot.holding
    if held is None:
        raise NotHolding("robot is not holding anything")
    mass = world.object(held).mass
    sigma = world.robot.weight_sigma if sigma is None else sigma
    if sigma > 0:
        rng = rng if rng is not None else np.random.default_rng([world.rng_seed & 0xFFFFFFFF, world.frame_id])
        mass += float(rng.normal(0.0, sigma))
    return mass
