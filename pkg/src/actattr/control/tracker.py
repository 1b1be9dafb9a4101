"""Frame-to-frame patch association by box overlap."""

from __future__ import annotations

from collections.abc import Sequence

from actattr.errors import TargetLost
from actattr.geometry import ImagePatch, iou

IOU_FLOOR = 0.1


def track_patch(prev: ImagePatch, current_frame_patches: Sequence[ImagePatch]) -> ImagePatch:
    """The current patch overlapping ``prev`` most, if its IoU clears 0.1."""
    best, best_iou = None, IOU_FLOOR
    for p in current_frame_patches:
        score = iou(prev.bbox, p.bbox)
        if score > best_iou:
            best, best_iou = p, score
    if best is None:
        raise TargetLost(f"no patch in frame overlaps the tracked {prev.label!r}")
    return best
