"""Bounding-box algebra and the spatial selections programs run on patches.

Pixel coordinates are continuous, origin top-left, v growing downward.
Every function here is pure.
"""

from __future__ import annotations

import math
import statistics
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional, Union

from actattr.errors import EmptyInput, InvalidBox, OrdinalOutOfRange, RowOutOfRange

SORT_KEYS = ("x", "y", "area", "width", "height")
AXES = ("from_left", "from_right", "from_top", "from_bottom")
DIMS = ("width", "height", "area")
ROW_GAP_FACTOR = 0.6

Position = Union[int, str]


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidBox(f"non-finite coordinates {coords}")
        if min(coords) < 0:
            raise InvalidBox(f"negative coordinates {coords}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidBox(f"empty box {coords}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def within(self, width: float, height: float) -> bool:
        return self.x_max <= width and self.y_max <= height


@dataclass(frozen=True)
class ImagePatch:
    """A detection: a box and label inside one camera frame.

    ``object_id`` is only filled in by oracle backends that know ground truth.
    """

    bbox: BoundingBox
    label: str
    confidence: float = 1.0
    frame_id: int = 0
    object_id: Optional[str] = None

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def centroid(self) -> tuple[float, float]:
        return centroid(self.bbox)


def centroid(b: BoundingBox) -> tuple[float, float]:
    return ((b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2)


def area(b: BoundingBox) -> float:
    return (b.x_max - b.x_min) * (b.y_max - b.y_min)


def hull(boxes: Sequence[BoundingBox]) -> BoundingBox:
    """Smallest box covering every input box."""
    if not boxes:
        raise EmptyInput("hull of no boxes")
    return BoundingBox(
        min(b.x_min for b in boxes),
        min(b.y_min for b in boxes),
        max(b.x_max for b in boxes),
        max(b.y_max for b in boxes),
    )


def iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (area(a) + area(b) - inter)


def _measure(p: ImagePatch, key: str) -> float:
    if key == "x":
        return p.centroid[0]
    if key == "y":
        return p.centroid[1]
    if key == "area":
        return area(p.bbox)
    if key == "width":
        return p.bbox.width
    if key == "height":
        return p.bbox.height
    raise ValueError(f"unknown sort key {key!r}; expected one of {SORT_KEYS}")


def _tie(p: ImagePatch, index: int) -> tuple:
    # patches with ground-truth ids order by id, the rest keep input order
    if p.object_id is not None:
        return (0, p.object_id, 0)
    return (1, "", index)


def sort_patches(ps: Sequence[ImagePatch], key: str = "x", order: str = "asc") -> list[ImagePatch]:
    """Sort patches by a centroid coordinate or a box dimension.

    Ties fall back to ``object_id`` when present, else to input position, so
    the result is deterministic and the sort is stable for id-less patches.

    >>> [p.centroid[0] for p in sort_patches(_demo([9, 1, 5]))]
    [1.0, 5.0, 9.0]
    """
    if not ps:
        raise EmptyInput("sort_patches needs at least one patch")
    if order not in ("asc", "desc"):
        raise ValueError(f"unknown order {order!r}")
    sign = 1.0 if order == "asc" else -1.0
    indexed = list(enumerate(ps))
    indexed.sort(key=lambda ip: (sign * _measure(ip[1], key), _tie(ip[1], ip[0])))
    return [p for _, p in indexed]


def default_gap_threshold(ps: Sequence[ImagePatch]) -> float:
    return ROW_GAP_FACTOR * statistics.median(p.bbox.height for p in ps)


def cluster_rows(ps: Sequence[ImagePatch], gap_threshold: Optional[float] = None) -> list[list[ImagePatch]]:
    """Group patches into rows by single-linkage on centroid v.

    Rows come out top to bottom, members left to right. A new row starts
    whenever consecutive centroid v values differ by more than the threshold,
    which defaults to 0.6 x the median patch height.
    """
    if not ps:
        raise EmptyInput("cluster_rows needs at least one patch")
    if gap_threshold is None:
        gap_threshold = default_gap_threshold(ps)
    if not gap_threshold > 0:
        raise ValueError("gap_threshold must be positive")
    by_v = sort_patches(ps, "y")
    rows: list[list[ImagePatch]] = [[by_v[0]]]
    for prev, cur in zip(by_v, by_v[1:]):
        if cur.centroid[1] - prev.centroid[1] > gap_threshold:
            rows.append([cur])
        else:
            rows[-1].append(cur)
    return [sort_patches(row, "x") for row in rows]


def resolve_ordinal(position: Position, count: int) -> int:
    """Map a signed 1-based ordinal (or ``"middle"``) to a 0-based index."""
    if position == "middle":
        return max(math.ceil(count / 2), 1) - 1
    if isinstance(position, bool) or not isinstance(position, int):
        raise OrdinalOutOfRange(f"ordinal must be an integer or 'middle', got {position!r}")
    if position == 0 or abs(position) > count:
        raise OrdinalOutOfRange(f"ordinal {position} out of range for {count} items")
    return position - 1 if position > 0 else count + position


def select_ordinal(
    ps: Sequence[ImagePatch],
    position: Position,
    axis: str = "from_left",
    row_spec: Optional[int] = None,
    gap_threshold: Optional[float] = None,
) -> ImagePatch:
    """Pick the k-th patch along an axis, optionally inside one row.

    Negative ordinals count from the end: ``row_spec=-2`` is the second to
    last row. ``from_right`` indexes the left-to-right order from its end, so
    position k from the left equals position n-k+1 from the right.
    """
    if not ps:
        raise EmptyInput("select_ordinal needs at least one patch")
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")
    members: Sequence[ImagePatch] = ps
    if row_spec is not None:
        rows = cluster_rows(ps, gap_threshold)
        try:
            members = rows[resolve_ordinal(row_spec, len(rows))]
        except OrdinalOutOfRange as exc:
            raise RowOutOfRange(f"row {row_spec} out of range for {len(rows)} rows") from exc
    key = "x" if axis in ("from_left", "from_right") else "y"
    ordered = sort_patches(members, key)
    # middle is taken on the forward order so both directions agree
    if axis in ("from_right", "from_bottom") and position != "middle":
        ordered.reverse()
    return ordered[resolve_ordinal(position, len(ordered))]


def select_superlative(ps: Sequence[ImagePatch], dim: str, extreme: str = "max") -> ImagePatch:
    """Patch with the largest or smallest width, height or area.

    Ties go to the smaller centroid u, then the smaller centroid v, then
    the same id-or-position fallback ``sort_patches`` uses.
    """
    if not ps:
        raise EmptyInput("select_superlative needs at least one patch")
    if dim not in DIMS:
        raise ValueError(f"unknown dimension {dim!r}; expected one of {DIMS}")
    if extreme not in ("max", "min"):
        raise ValueError(f"unknown extreme {extreme!r}")
    sign = -1.0 if extreme == "max" else 1.0

    def rank(ip):
        i, p = ip
        u, v = p.centroid
        return (sign * _measure(p, dim), u, v, _tie(p, i))

    return min(enumerate(ps), key=rank)[1]


def pixel_distance(p: ImagePatch, point: Sequence[float]) -> float:
    u, v = p.centroid
    return math.hypot(u - point[0], v - point[1])


def _demo(xs):
    return [ImagePatch(BoundingBox(x - 1, 0, x + 1, 2), "demo") for x in xs]
