"""Primitive registry: every call a program may make, with arity and effect flags.

Pure helpers run inside the interpreter. Perception, sensing and action
primitives are delegated to an environment (in-process or bridged).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable, Optional

from actattr import geometry as geo
from actattr.errors import EmptyInput, OrdinalOutOfRange
from actattr.geometry import ImagePatch


@dataclass(frozen=True)
class PrimitiveBinding:
    name: str
    params: tuple[tuple[str, str], ...]
    returns: str
    effectful: bool = False
    env: bool = False
    min_args: Optional[int] = None
    variadic: bool = False
    doc: str = ""

    @property
    def arity(self) -> tuple[int, Optional[int]]:
        lo = len(self.params) if self.min_args is None else self.min_args
        return lo, (None if self.variadic else len(self.params))


def _patches(value) -> list[ImagePatch]:
    if not isinstance(value, list) or not all(isinstance(p, ImagePatch) for p in value):
        raise TypeError("expected a list of patches")
    return value


def _patch(value) -> ImagePatch:
    if not isinstance(value, ImagePatch):
        raise TypeError(f"expected a patch, got {type(value).__name__}")
    return value


def _first(ps):
    if not ps:
        raise EmptyInput("first() of an empty list")
    return ps[0]


def _item(values, index):
    return values[geo.resolve_ordinal(index, len(values))]


def _top(values, k):
    if not isinstance(k, int) or k < 0:
        raise OrdinalOutOfRange(f"top() needs a non-negative count, got {k!r}")
    return list(values[:k])


def _flatten(values):
    out = []
    for v in values:
        out.extend(v if isinstance(v, list) else [v])
    return out


def _range(n):
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"range() needs a non-negative integer, got {n!r}")
    return list(range(n))


def _format(template, *args):
    text = str(template)
    for a in args:
        text = text.replace("{}", _to_text(a), 1)
    return text


def _to_text(value) -> str:
    if isinstance(value, ImagePatch):
        return value.label
    if isinstance(value, list):
        return ", ".join(_to_text(v) for v in value)
    return str(value)


PURE_IMPLS: dict[str, Callable] = {
    "exists": lambda ps: len(ps) > 0,
    "count": lambda ps: len(ps),
    "first": _first,
    "top": _top,
    "item": _item,
    "flatten": _flatten,
    "range": _range,
    "format": _format,
    "centroid": lambda p: list(geo.centroid(_patch(p).bbox)),
    "centroid_x": lambda p: _patch(p).centroid[0],
    "centroid_y": lambda p: _patch(p).centroid[1],
    "area": lambda p: geo.area(_patch(p).bbox),
    "width": lambda p: _patch(p).bbox.width,
    "height": lambda p: _patch(p).bbox.height,
    "sort_patches": lambda ps, key="x", order="asc": geo.sort_patches(_patches(ps), key, order),
    "cluster_rows": lambda ps, threshold=None: geo.cluster_rows(_patches(ps), threshold),
    "select_ordinal": lambda ps, pos, axis="from_left", row=None: geo.select_ordinal(_patches(ps), pos, axis, row),
    "select_superlative": lambda ps, dim, extreme="max": geo.select_superlative(_patches(ps), dim, extreme),
    "pixel_distance": lambda p, point: geo.pixel_distance(_patch(p), point),
}


def _b(name, params, returns, doc, **kw) -> PrimitiveBinding:
    return PrimitiveBinding(name, tuple(params), returns, doc=doc.strip(), **kw)


BINDINGS = [
    # perception
    _b("find", [("label", "text")], "patches", env=True, doc="""
Locate every object matching a free-text label in the current camera frame.
    let mugs = find("mug")
An empty list means nothing was found; guard with exists(mugs)."""),
    _b("visual_query", [("question", "text"), ("patch", "patch")], "text", env=True, min_args=1, doc="""
Ask the vision model about the frame. Supported: "list_items" returns the
visible object names left to right, comma separated; with a patch,
visual_query("what is this?", p) names the object in the patch."""),
    _b("language_query", [("question", "text")], "text", env=True, doc="""
Ask the language model for factual knowledge, e.g.
    language_query(format("Out of these items, which one is more likely to be the heaviest one? {}", items))"""),
    _b("image_center", [], "point", env=True, doc="Pixel coordinates [u, v] of the frame center."),
    # sensing
    _b("get_pose", [], "pose", env=True, doc="Current base pose [x, y, theta]; pass it to go_to_pose to come back."),
    _b("measure_weight", [], "number", env=True, doc="""
Weight in kg of the held object from the wrist force/torque sensor.
Precondition: the robot holds the object.
    go_to_object(p)
    pick_up(p)
    let w = measure_weight()"""),
    # actions
    _b("go_to_object", [("patch", "patch")], "outcome", env=True, effectful=True, doc="""
Align on the patch, then drive until the object is at the grasp standoff."""),
    _b("focus_on_patch", [("patch", "patch")], "outcome", env=True, effectful=True, doc="""
Move sideways until the patch is centered in the frame."""),
    _b("measure_distance", [("patch", "patch")], "number", env=True, effectful=True, doc="""
Focus on the patch and return the distance sensor reading in meters.
    let d = measure_distance(p)"""),
    _b("pick_up", [("patch", "patch")], "none", env=True, effectful=True, doc="""
Grasp the object in front of the gripper.
Precondition: hands free and the object within the standoff.
    go_to_object(p)
    pick_up(p)"""),
    _b("put_on", [("surface", "text")], "none", env=True, effectful=True, doc="""
Place the held object on a surface in front of the gripper; "floor" is the ground.
Precondition: the robot holds an object."""),
    _b("go_to_pose", [("pose", "pose")], "outcome", env=True, effectful=True, doc="""
Drive the base back to a pose recorded with get_pose()."""),
    # list and text helpers
    _b("exists", [("values", "list")], "bool", doc="True when the list is non-empty."),
    _b("count", [("values", "list")], "number", doc="Number of elements."),
    _b("first", [("values", "list")], "any", doc="First element; fails on an empty list."),
    _b("top", [("values", "list"), ("k", "number")], "list", doc="The first k elements (fewer if the list is shorter)."),
    _b("item", [("values", "list"), ("index", "number")], "any", doc="1-based element; negative indexes count from the end."),
    _b("flatten", [("values", "list")], "list", doc="Concatenate a list of lists."),
    _b("range", [("n", "number")], "list", doc="[0, 1, ..., n-1]."),
    _b("format", [("template", "text"), ("value", "any")], "text", min_args=1, variadic=True, doc="""
Replace each {} in the template with the next value; lists join with ", "."""),
    # patch geometry
    _b("centroid", [("patch", "patch")], "point", doc="[u, v] center of the box."),
    _b("centroid_x", [("patch", "patch")], "number", doc="Horizontal centroid."),
    _b("centroid_y", [("patch", "patch")], "number", doc="Vertical centroid (grows downward)."),
    _b("area", [("patch", "patch")], "number", doc="Box area in pixels."),
    _b("width", [("patch", "patch")], "number", doc="Box width in pixels."),
    _b("height", [("patch", "patch")], "number", doc="Box height in pixels."),
    _b("sort_patches", [("patches", "patches"), ("key", "text"), ("order", "text")], "patches", min_args=1, doc="""
Sort by x, y, area, width or height, asc or desc.
    let ordered = sort_patches(find("cup"), x, asc)"""),
    _b("cluster_rows", [("patches", "patches"), ("threshold", "number")], "rows", min_args=1, doc="""
Group patches into rows, top to bottom, each row left to right."""),
    _b("select_ordinal", [("patches", "patches"), ("position", "ordinal"), ("axis", "text"), ("row", "ordinal")],
       "patch", min_args=2, doc="""
k-th patch along an axis (from_left, from_right, from_top, from_bottom), optionally in one row.
Negative ordinals count from the end; middle picks the center.
    select_ordinal(find("umbrella"), 2, from_left, -2)   # second from the left, second to last row"""),
    _b("select_superlative", [("patches", "patches"), ("dim", "text"), ("extreme", "text")], "patch", min_args=2, doc="""
Patch with the max or min width, height or area.
    select_superlative(find("pencil"), height, max)   # the tallest pencil"""),
    _b("pixel_distance", [("patch", "patch"), ("point", "point")], "number", doc="Pixel distance from the centroid to a point."),
]

REGISTRY: dict[str, PrimitiveBinding] = {b.name: b for b in BINDINGS}
ENV_PRIMITIVES = frozenset(b.name for b in BINDINGS if b.env)
EFFECTFUL = frozenset(b.name for b in BINDINGS if b.effectful)

# bare words that read as text literals unless shadowed by a variable
SYMBOLS = frozenset(
    list(geo.SORT_KEYS) + list(geo.AXES) + list(geo.DIMS) + ["asc", "desc", "max", "min", "middle"]
)


def call_pure(name: str, args: Sequence):
    return PURE_IMPLS[name](*args)


def api_doc() -> str:
    """Text handed to an external planner describing the callable API."""
    lines = [
        "Write a program in the perception-action language. Statements, one per line:",
        "  let NAME = EXPR | for NAME in EXPR { ... } | if COND { ... } else { ... } | answer EXPR | CALL",
        "Expressions: calls, variables, numbers, \"text\", [lists],",
        "  argmin NAME in EXPR { ... } by EXPR   (argmax likewise).",
        "Conditions compare with < > <= >= == or test a value's truth.",
        "Every path must end in exactly one answer.",
        "",
    ]
    for b in BINDINGS:
        sig = ", ".join(f"{n}: {t}" for n, t in b.params) + (", ..." if b.variadic else "")
        tag = " [action]" if b.effectful else ""
        lines.append(f"{b.name}({sig}) -> {b.returns}{tag}")
        lines.extend("    " + ln for ln in b.doc.splitlines())
    return "\n".join(lines) + "\n"
