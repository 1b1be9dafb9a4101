"""JSON-safe encoding of runtime values.

Programs see numbers, text, booleans, lists, dicts and patches. Patches are
tagged so they survive a trip through JSON and decode to equal values.
"""

from __future__ import annotations

from actattr.geometry import BoundingBox, ImagePatch

PATCH_TAG = "$patch"


def encode(value):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, ImagePatch):
        return {
            PATCH_TAG: {
                "bbox": list(value.bbox.as_tuple()),
                "label": value.label,
                "confidence": value.confidence,
                "frame_id": value.frame_id,
                "object_id": value.object_id,
            }
        }
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        if any(not isinstance(k, str) or k.startswith("$") for k in value):
            raise TypeError("dict keys must be text not starting with '$'")
        return {k: encode(v) for k, v in value.items()}
    raise TypeError(f"cannot encode {type(value).__name__}")


def decode(data):
    if data is None or isinstance(data, (bool, int, float, str)):
        return data
    if isinstance(data, list):
        return [decode(v) for v in data]
    if isinstance(data, dict):
        if PATCH_TAG in data:
            p = data[PATCH_TAG]
            return ImagePatch(
                BoundingBox(*(float(c) for c in p["bbox"])),
                str(p["label"]),
                float(p["confidence"]),
                int(p["frame_id"]),
                p.get("object_id"),
            )
        return {k: decode(v) for k, v in data.items()}
    raise TypeError(f"cannot decode {type(data).__name__}")
