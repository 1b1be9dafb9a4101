from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actattr.errors import EmptyInput, InvalidBox, OrdinalOutOfRange, RowOutOfRange
from actattr.geometry import (
    BoundingBox,
    ImagePatch,
    area,
    centroid,
    cluster_rows,
    hull,
    iou,
    select_ordinal,
    select_superlative,
    sort_patches,
)
from oracles import brute_superlative


def box_at(u, v, w=4.0, h=4.0):
    return BoundingBox(u - w / 2, v - h / 2, u + w / 2, v + h / 2)


def patch_at(u, v, w=4.0, h=4.0, oid=None):
    return ImagePatch(box_at(u, v, w, h), "thing", object_id=oid)


coord = st.floats(0, 1000, allow_nan=False, allow_infinity=False)
size = st.floats(0.5, 200, allow_nan=False, allow_infinity=False)


@st.composite
def boxes(draw):
    x, y, w, h = draw(coord), draw(coord), draw(size), draw(size)
    return BoundingBox(x, y, x + w, y + h)


@st.composite
def patch_lists(draw, min_size=1, max_size=12):
    bs = draw(st.lists(boxes(), min_size=min_size, max_size=max_size))
    return [ImagePatch(b, "thing", object_id=None) for b in bs]


# -- examples --------------------------------------------------------------

@pytest.mark.parametrize("coords,expected", [
    ((10, 20, 30, 60), (20, 40)),
    ((0, 0, 2, 2), (1, 1)),
    ((75, 75, 125, 125), (100, 100)),
])
def test_centroid_examples(coords, expected):
    assert centroid(BoundingBox(*coords)) == expected


def test_area_examples():
    assert area(BoundingBox(0, 0, 10, 10)) == 100
    assert area(BoundingBox(5, 5, 6, 7)) == 2


@pytest.mark.parametrize("coords", [(1, 1, 1, 5), (0, 3, 4, 3), (5, 0, 2, 4), (-1, 0, 2, 2), (0, 0, float("nan"), 2)])
def test_invalid_boxes_rejected(coords):
    with pytest.raises(InvalidBox):
        BoundingBox(*coords)


def test_confidence_must_be_fraction():
    with pytest.raises(ValueError):
        ImagePatch(BoundingBox(0, 0, 1, 1), "x", confidence=1.5)


def test_sort_patches_example_and_stability():
    ps = [patch_at(u, 10, w=1) for u in (9, 1, 5)]
    assert [p.centroid[0] for p in sort_patches(ps)] == [1, 5, 9]
    same = [ImagePatch(box_at(10, 10), f"p{i}") for i in range(4)]
    assert [p.label for p in sort_patches(same)] == ["p0", "p1", "p2", "p3"]
    with pytest.raises(EmptyInput):
        sort_patches([])


def test_sort_ties_use_object_id():
    ps = [patch_at(10, 10, oid="b"), patch_at(10, 10, oid="a")]
    assert [p.object_id for p in sort_patches(ps)] == ["a", "b"]


@pytest.mark.parametrize("key", ["x", "y", "area", "width", "height"])
@pytest.mark.parametrize("order", ["asc", "desc"])
def test_sort_matches_comparison_sort(key, order):
    rng = random.Random(f"{key}-{order}")
    for _ in range(30):
        ps = [ImagePatch(BoundingBox(x, y, x + rng.uniform(1, 50), y + rng.uniform(1, 50)), f"p{i}")
              for i, (x, y) in enumerate((rng.uniform(0, 300), rng.uniform(0, 200)) for _ in range(20))]
        measure = {
            "x": lambda p: (p.bbox.x_min + p.bbox.x_max) / 2,
            "y": lambda p: (p.bbox.y_min + p.bbox.y_max) / 2,
            "area": lambda p: p.bbox.width * p.bbox.height,
            "width": lambda p: p.bbox.width,
            "height": lambda p: p.bbox.height,
        }[key]
        # selection sort as the reference
        rest, expected = list(range(len(ps))), []
        while rest:
            pick = rest[0]
            for i in rest[1:]:
                a, b = measure(ps[i]), measure(ps[pick])
                if (a < b) if order == "asc" else (a > b):
                    pick = i
            expected.append(ps[pick])
            rest.remove(pick)
        assert sort_patches(ps, key, order) == expected


def test_cluster_rows_examples():
    ps = [patch_at(10, 10), patch_at(15, 12), patch_at(13, 50)]
    rows = cluster_rows(ps, 20)
    assert [[p.centroid[1] for p in r] for r in rows] == [[10, 12], [50]]
    flat = [patch_at(u, 30) for u in (40, 10, 20)]
    assert [[p.centroid[0] for p in r] for r in cluster_rows(flat)] == [[10, 20, 40]]
    with pytest.raises(EmptyInput):
        cluster_rows([])
    with pytest.raises(ValueError):
        cluster_rows(ps, 0)


def test_cluster_rows_jittered_grid():
    rng = random.Random(7)
    rows, cols, pitch, height = 3, 4, 40.0, 20.0
    threshold = 0.6 * height
    truth = {}
    ps = []
    for r in range(rows):
        for c in range(cols):
            u = 30 + 50 * c + rng.uniform(-5, 5)
            v = 30 + pitch * r + rng.uniform(-threshold / 4, threshold / 4)
            oid = f"r{r}c{c}"
            truth[oid] = (r, c)
            ps.append(ImagePatch(box_at(u, v, 16, height), "umbrella", object_id=oid))
    rng.shuffle(ps)
    got = cluster_rows(ps)
    assert [len(r) for r in got] == [4, 4, 4]
    assert [[truth[p.object_id] for p in row] for row in got] == [[(r, c) for c in range(cols)] for r in range(rows)]
    # second to last row, second from the left -> grid (1, 1)
    assert truth[select_ordinal(ps, 2, "from_left", -2).object_id] == (1, 1)


def test_select_ordinal_examples():
    ps = [patch_at(u, 10, oid=f"o{u}") for u in (50, 10, 40, 20, 30)]
    assert select_ordinal(ps, 2, "from_left").object_id == "o20"
    assert select_ordinal(ps, 1, "from_right").object_id == "o50"
    assert select_ordinal(ps, -1, "from_left").object_id == "o50"
    assert select_ordinal(ps, "middle").object_id == "o30"
    with pytest.raises(OrdinalOutOfRange):
        select_ordinal(ps, 6)
    with pytest.raises(OrdinalOutOfRange):
        select_ordinal(ps, 0)
    with pytest.raises(RowOutOfRange):
        select_ordinal(ps, 1, "from_left", 3)
    with pytest.raises(EmptyInput):
        select_ordinal([], 1)
    with pytest.raises(ValueError):
        select_ordinal(ps, 1, "diagonal")


def test_select_superlative_examples():
    ps = [ImagePatch(BoundingBox(0, 0, 10, 10), "a", object_id="a"),
          ImagePatch(BoundingBox(20, 0, 22, 2), "b", object_id="b"),
          ImagePatch(BoundingBox(30, 0, 35, 5), "c", object_id="c")]
    assert select_superlative(ps, "area", "max").object_id == "a"
    assert select_superlative(ps, "area", "min").object_id == "b"
    tie = [ImagePatch(BoundingBox(50, 0, 60, 10), "r", object_id="right"),
           ImagePatch(BoundingBox(0, 0, 4, 10), "l", object_id="left")]
    assert select_superlative(tie, "height", "max").object_id == "left"
    with pytest.raises(EmptyInput):
        select_superlative([], "area")
    with pytest.raises(ValueError):
        select_superlative(ps, "depth")


@pytest.mark.parametrize("dim", ["width", "height", "area"])
def test_select_superlative_matches_scan(dim):
    rng = random.Random(dim)
    for _ in range(50):
        ps = []
        for i in range(30):
            x, y = rng.uniform(0, 300), rng.uniform(0, 200)
            # integer sizes make ties common
            ps.append(ImagePatch(BoundingBox(x, y, x + rng.randint(1, 6), y + rng.randint(1, 6)), "t", object_id=f"o{i}"))
        value = {"width": lambda p: p.bbox.width, "height": lambda p: p.bbox.height,
                 "area": lambda p: p.bbox.width * p.bbox.height}[dim]
        for extreme in ("max", "min"):
            items = [(p.object_id, value(p), *p.centroid) for p in ps]
            assert select_superlative(ps, dim, extreme).object_id == brute_superlative(items, extreme)


def test_iou_and_hull():
    a, b = BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 15, 10)
    assert iou(a, b) == pytest.approx(50 / 150)
    assert iou(a, BoundingBox(20, 20, 30, 30)) == 0.0
    assert hull([a, b]).as_tuple() == (0, 0, 15, 10)
    with pytest.raises(EmptyInput):
        hull([])


# -- properties ------------------------------------------------------------

@given(boxes())
def test_centroid_inside_and_area_positive(b):
    u, v = centroid(b)
    assert b.x_min <= u <= b.x_max and b.y_min <= v <= b.y_max
    assert area(b) > 0


@given(patch_lists(), st.sampled_from(["x", "y", "area", "width", "height"]), st.sampled_from(["asc", "desc"]))
def test_sort_is_idempotent_permutation(ps, key, order):
    out = sort_patches(ps, key, order)
    assert sorted(map(id, out)) == sorted(map(id, ps))
    assert sort_patches(out, key, order) == out


@given(patch_lists(max_size=20))
def test_cluster_rows_partitions_input(ps):
    rows = cluster_rows(ps)
    flat = [p for r in rows for p in r]
    assert sorted(map(id, flat)) == sorted(map(id, ps))
    assert all(len(r) > 0 for r in rows)


@given(patch_lists(), st.data())
def test_left_right_duality(ps, data):
    k = data.draw(st.integers(1, len(ps)))
    assert select_ordinal(ps, k, "from_left") is select_ordinal(ps, len(ps) - k + 1, "from_right")


@given(patch_lists(), st.randoms(use_true_random=False))
def test_superlative_permutation_invariant(ps, rnd):
    ps = [ImagePatch(p.bbox, p.label, object_id=f"o{i}") for i, p in enumerate(ps)]
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    assert select_superlative(ps, "area", "max").object_id == select_superlative(shuffled, "area", "max").object_id


@settings(max_examples=50)
@given(boxes(), boxes())
def test_iou_symmetric_and_bounded(a, b):
    assert iou(a, b) == pytest.approx(iou(b, a))
    assert 0.0 <= iou(a, b) <= 1.0
    assert iou(a, a) == pytest.approx(1.0)
