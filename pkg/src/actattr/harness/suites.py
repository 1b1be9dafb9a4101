"""Seeded scene and query generators for the four task families.

Every generator is a pure function of its arguments: the same seed gives the
same suite, byte for byte, which ``Suite.content_hash`` makes checkable.
Ground truth is bookkept from the generator's own layout, never recovered
from rendered geometry.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from actattr.errors import KbTooSmall
from actattr.geometry import area
from actattr.lang.planner import SIZE_ADJECTIVES, Query, ordinal_word, signed_ordinal_phrase
from actattr.sim.camera import project
from actattr.sim.oracles import KnowledgeBase
from actattr.sim.world import Robot, SceneObject, World, world_from_dict, world_to_dict

FACING = math.pi / 2  # robots start at the origin looking along +y
MIN_MASS_RATIO = 10.0

WEIGHT_DEPTH = 1.2
WEIGHT_SPACING = 0.5

DISTANCE_RANGE = (0.8, 3.5)
DISTANCE_MIN_GAP = 0.3
DISTANCE_LATERAL = 0.35  # objects sit on a fixed-width strip regardless of depth
DISTANCE_NAMES = (
    "mug", "book", "laptop", "shoe", "bottle", "apple", "handbag", "tennis ball",
    "microwave", "suitcase", "bowl", "vase", "lamp", "backpack", "teddy bear", "plant",
)

WALL_DEPTH = 3.0
GRID_NAMES = ("umbrella", "window", "tart", "cup", "painting", "clock", "tile", "frame")
GRID_COL_SPACING = 0.5
GRID_ROW_SPACING = 0.3
GRID_JITTER = 0.03

SIZE_DEPTH = 2.5
SIZE_NAMES = ("pencil", "line", "box", "bottle", "book", "candle", "rod", "plank")
SIZE_MARGIN = 1.25


@dataclass(frozen=True)
class Episode:
    scene: dict
    query: Query

    def world(self) -> World:
        return world_from_dict(self.scene)

    def to_dict(self) -> dict:
        return {"scene": self.scene, "query": self.query.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Episode":
        return cls(d["scene"], Query.from_dict(d["query"]))


@dataclass
class Suite:
    name: str
    family: str
    seed: int
    episodes: list[Episode] = field(default_factory=list)

    def __len__(self):
        return len(self.episodes)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "seed": self.seed,
            "episodes": [e.to_dict() for e in self.episodes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Suite":
        return cls(d["name"], d["family"], int(d["seed"]), [Episode.from_dict(e) for e in d["episodes"]])

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Suite":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _rng(seed: int, family: str) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, sum(family.encode())])


def _scene_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**31 - 1))


def _robot() -> Robot:
    return Robot(pose=(0.0, 0.0, FACING))


def _slug(name: str) -> str:
    return name.replace(" ", "_")


def _r(x: float) -> float:
    # rounding keeps suite files short and hashes platform independent
    return round(float(x), 6)


def _episode(objects: list[SceneObject], seed: int, query: Query) -> Episode:
    world = World(objects=objects, robot=_robot(), rng_seed=seed)
    return Episode(world_to_dict(world), query)


# -- weight ----------------------------------------------------------------

def weight_half_extent(mass: float) -> float:
    """Cube half-size grows with log-mass, so heavier things also look bigger."""
    return _r(0.075 + 0.015 * (math.log10(mass) + 3.0))


def valid_triplets(kb: KnowledgeBase) -> list[tuple[str, str, str]]:
    names = sorted(kb.masses, key=lambda n: (kb.masses[n], n))
    out = []
    for a, b, c in itertools.combinations(names, 3):
        ma, mb, mc = kb.masses[a], kb.masses[b], kb.masses[c]
        if mb >= MIN_MASS_RATIO * ma and mc >= MIN_MASS_RATIO * mb:
            out.append((a, b, c))
    return out


def weight_query_text(items: list[str], direction: str) -> str:
    word = "most lightweight" if direction == "lightest" else "heaviest"
    return f"Out of the {{{', '.join(items)}}}, which one is the {word}?"


def gen_weight_suite(
    n: int, kb: Optional[KnowledgeBase] = None, seed: int = 0, direction: str = "lightest"
) -> Suite:
    """Triplets of objects, each at least ten times heavier than the next.

    Objects stand on the floor in a row in front of the robot, in random
    left-to-right order. ``direction`` is ``"lightest"``, ``"heaviest"`` or
    ``"mixed"`` (a fair coin per episode).
    """
    kb = kb or KnowledgeBase.bundled()
    if direction not in ("lightest", "heaviest", "mixed"):
        raise ValueError(f"unknown direction {direction!r}")
    masses = list(kb.masses.values())
    if len(masses) < 3 or max(masses) < 100 * min(masses):
        raise KbTooSmall("need at least 3 names spanning two orders of magnitude of mass")
    triplets = valid_triplets(kb)
    if not triplets:
        raise KbTooSmall(f"no triplet has consecutive mass ratios of {MIN_MASS_RATIO:g}x")
    rng = _rng(seed, "weight")
    episodes = []
    for _ in range(n):
        triplet = triplets[int(rng.integers(len(triplets)))]
        order = [triplet[i] for i in rng.permutation(3)]
        d = direction if direction != "mixed" else ("lightest" if rng.random() < 0.5 else "heaviest")
        scene_seed = _scene_seed(rng)
        objects = []
        for slot, name in enumerate(order):
            e = weight_half_extent(kb.mass(name))
            x = (slot - 1) * WEIGHT_SPACING
            objects.append(SceneObject(f"{_slug(name)}_{slot}", name, (x, _r(WEIGHT_DEPTH + e), e), (e, e, e), kb.mass(name)))
        target = min(objects, key=lambda o: o.mass) if d == "lightest" else max(objects, key=lambda o: o.mass)
        episodes.append(_episode(objects, scene_seed, Query(weight_query_text(order, d), "weight_extreme", target.id)))
    return Suite(f"weight-{seed}", "weight_extreme", seed, episodes)


# -- distance --------------------------------------------------------------

def camera_distance(obj: SceneObject, robot: Robot) -> float:
    """Euclidean distance from the camera to the object's center."""
    x, y, _ = robot.pose
    cz = robot.camera.pose.xyz[2]
    return math.dist((x, y, cz), obj.center)


def gen_distance_suite(n: int, seed: int = 0) -> Suite:
    """2-4 distinct objects on the floor at distinct distances; the nearest one is the answer.

    Distances differ pairwise by at least 0.3 m, and the nearest-first order
    of front-face depths matches the order of center distances.
    """
    rng = _rng(seed, "distance")
    episodes = []
    robot = _robot()
    while len(episodes) < n:
        k = int(rng.integers(2, 5))
        names = [DISTANCE_NAMES[i] for i in rng.choice(len(DISTANCE_NAMES), size=k, replace=False)]
        scene_seed = _scene_seed(rng)
        objects = _place_distance_objects(names, rng)
        if objects is None:
            continue
        by_center = sorted(objects, key=lambda o: camera_distance(o, robot))
        by_face = sorted(objects, key=lambda o: o.lo[1])
        dists = [camera_distance(o, robot) for o in by_center]
        if by_center != by_face or min(b - a for a, b in zip(dists, dists[1:])) < DISTANCE_MIN_GAP:
            continue
        text = f"Out of the {{{', '.join(names)}}}, which one is closer to me?"
        episodes.append(_episode(objects, scene_seed, Query(text, "distance_extreme", by_center[0].id)))
    return Suite(f"distance-{seed}", "distance_extreme", seed, episodes)


def _place_distance_objects(names: list[str], rng: np.random.Generator) -> Optional[list[SceneObject]]:
    objects: list[SceneObject] = []
    for slot, name in enumerate(names):
        for _ in range(50):
            e = _r(rng.uniform(0.06, 0.12))
            depth = _r(rng.uniform(*DISTANCE_RANGE))
            x = _r(rng.uniform(-DISTANCE_LATERAL + e, DISTANCE_LATERAL - e))
            cand = SceneObject(f"{_slug(name)}_{slot}", name, (x, _r(depth + e), e), (e, e, e), 1.0)
            # disjoint x ranges keep every object unoccluded along its own line of sight
            if all(cand.hi[0] + 0.02 < o.lo[0] or o.hi[0] + 0.02 < cand.lo[0] for o in objects):
                objects.append(cand)
                break
        else:
            return None
    return objects


# -- location --------------------------------------------------------------

def grid_row_phrase(row: int, rows: int, rng: np.random.Generator) -> tuple[str, int]:
    """A phrase naming row ``row`` (0-based, top first) and the signed ordinal it encodes."""
    from_bottom = rows - row  # 1-based from the bottom
    choices = [(f"{ordinal_word(row + 1)} row", row + 1), (f"{signed_ordinal_phrase(-from_bottom)} row", -from_bottom),
               (f"{ordinal_word(from_bottom)} row from the bottom", -from_bottom)]
    if row == 0:
        choices.append(("top row", 1))
    if row == rows - 1:
        choices.append(("bottom row", -1))
    phrase, signed = choices[int(rng.integers(len(choices)))]
    return phrase, signed


def gen_location_suite(
    n: int, seed: int = 0, rows_range: tuple[int, int] = (2, 5), cols_range: tuple[int, int] = (2, 5)
) -> Suite:
    """Grids of same-named objects on a wall, queried by ordinal position.

    Rows are horizontal lines of objects; queries name a position from the
    left or right (or the middle) and, when there is more than one row, a
    row counted from the top or from the bottom.
    """
    rng = _rng(seed, "location")
    episodes = []
    for _ in range(n):
        rows = int(rng.integers(rows_range[0], rows_range[1] + 1))
        cols = int(rng.integers(cols_range[0], cols_range[1] + 1))
        name = GRID_NAMES[int(rng.integers(len(GRID_NAMES)))]
        scene_seed = _scene_seed(rng)
        objects, ids = [], {}
        for r in range(rows):
            for c in range(cols):
                x = (c - (cols - 1) / 2) * GRID_COL_SPACING + rng.uniform(-GRID_JITTER, GRID_JITTER)
                z = 0.15 + (rows - 1 - r) * GRID_ROW_SPACING + rng.uniform(-GRID_JITTER, GRID_JITTER)
                oid = f"{_slug(name)}_r{r}_c{c}"
                ids[r, c] = oid
                objects.append(SceneObject(oid, name, (_r(x), WALL_DEPTH, _r(z)), (0.1, 0.01, 0.08), 1.0, False))
        row = int(rng.integers(rows))
        if rng.random() < 0.15:
            col = math.ceil(cols / 2) - 1
            text = f"the {name} in the middle"
        else:
            k = int(rng.integers(1, cols + 1))
            side = "left" if rng.random() < 0.5 else "right"
            col = k - 1 if side == "left" else cols - k
            text = f"the {ordinal_word(k)} {name} from the {side}"
        if rows > 1:
            phrase, _ = grid_row_phrase(row, rows, rng)
            text += f" {'at' if rng.random() < 0.5 else 'in'} the {phrase}"
        episodes.append(_episode(objects, scene_seed, Query(text, "location_ordinal", ids[row, col])))
    return Suite(f"location-{seed}", "location_ordinal", seed, episodes)


# -- size ------------------------------------------------------------------

def _pixel_measure(world: World, dim: str) -> dict[str, float]:
    out = {}
    for p in project(world):
        b = p.bbox
        out[p.object_id] = {"width": b.width, "height": b.height, "area": area(b)}[dim]
    return out


def _has_margin(values: dict[str, float], target: str, extreme: str) -> bool:
    others = [v for k, v in values.items() if k != target]
    if extreme == "max":
        return all(values[target] >= SIZE_MARGIN * v for v in others)
    return all(values[target] * SIZE_MARGIN <= v for v in others)


def gen_size_suite(n: int, seed: int = 0) -> Suite:
    """A row of same-named objects with one clear extreme in the queried dimension.

    The extreme beats every other object by at least 25% both physically and
    in the rendered boxes.
    """
    rng = _rng(seed, "size")
    adjectives = sorted(SIZE_ADJECTIVES)
    episodes = []
    while len(episodes) < n:
        count = int(rng.integers(3, 6))
        name = SIZE_NAMES[int(rng.integers(len(SIZE_NAMES)))]
        adj = adjectives[int(rng.integers(len(adjectives)))]
        dim, extreme = SIZE_ADJECTIVES[adj]
        scene_seed = _scene_seed(rng)
        ex = rng.uniform(0.04, 0.2, count)
        ez = rng.uniform(0.04, 0.2, count)
        gap = 0.08
        total = 2 * ex.sum() + gap * (count - 1)
        left = -total / 2
        objects = []
        for i in range(count):
            x = left + ex[i]
            left += 2 * ex[i] + gap
            objects.append(
                SceneObject(f"{_slug(name)}_{i}", name, (_r(x), SIZE_DEPTH, _r(0.1 + rng.uniform(-0.05, 0.05))),
                            (_r(ex[i]), 0.01, _r(ez[i])), 1.0, False)
            )
        physical = {o.id: {"width": o.extent[0], "height": o.extent[2], "area": o.extent[0] * o.extent[2]}[dim]
                    for o in objects}
        pick = max if extreme == "max" else min
        target = pick(physical, key=physical.get)
        world = World(objects=objects, robot=_robot(), rng_seed=scene_seed)
        pixels = _pixel_measure(world, dim)
        if len(pixels) != count or not _has_margin(physical, target, extreme) or not _has_margin(pixels, target, extreme):
            continue
        episodes.append(Episode(world_to_dict(world), Query(f"the {adj} {name}", "size_superlative", target)))
    return Suite(f"size-{seed}", "size_superlative", seed, episodes)


GENERATORS = {
    "weight": lambda n, seed: gen_weight_suite(n, seed=seed),
    "distance": lambda n, seed: gen_distance_suite(n, seed=seed),
    "location": lambda n, seed: gen_location_suite(n, seed=seed),
    "size": lambda n, seed: gen_size_suite(n, seed=seed),
}


def generate(family: str, n: int, seed: int = 0) -> Suite:
    try:
        gen = GENERATORS[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(GENERATORS)}") from None
    return gen(n, seed)

