import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import boxes, int_boxes, random_int_boxes
from detmath.geometry import BBox, boxes_to_array, iog, iou, pairwise_iou
from oracles import raster_iog, raster_iou


def test_bbox_rejects_degenerate():
    with pytest.raises(ValueError):
        BBox(0, 0, 0, 10)
    with pytest.raises(ValueError):
        BBox(0, 5, 10, 5)
    with pytest.raises(ValueError):
        BBox(0, 0, -1, 10)
    with pytest.raises(ValueError):
        BBox(0, 0, float("nan"), 10)


def test_from_xywh():
    assert BBox.from_xywh(10, 20, 30, 40) == BBox(10, 20, 40, 60)
    assert BBox(0, 0, 4, 3).area == 12


def test_iou_examples():
    a = BBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BBox(20, 20, 30, 30)) == 0.0
    # cell-count oracle at 4x resolution
    expected = raster_iou((0, 0, 10, 10), (5, 5, 15, 15), res=4)
    assert iou(a, BBox(5, 5, 15, 15)) == pytest.approx(expected, abs=1e-15)
    assert iou(a, BBox(5, 5, 15, 15)) == pytest.approx(1 / 7, abs=1e-15)


def test_iog_examples():
    p = BBox(0, 0, 10, 10)
    assert iog(BBox(0, 0, 20, 20), BBox(2, 2, 8, 8)) == 1.0
    assert iog(p, BBox(5, 5, 15, 15)) == raster_iog((0, 0, 10, 10), (5, 5, 15, 15), res=4) == 0.25
    assert iog(p, BBox(50, 50, 60, 60)) == 0.0


def test_touching_boxes_do_not_overlap():
    assert iou(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) == 0.0


def test_pairwise_iou_shapes_and_values(rng):
    a = BBox(0, 0, 10, 10)
    assert pairwise_iou([a], [a]).tolist() == [[1.0]]
    assert pairwise_iou([a], [BBox(20, 20, 30, 30)]).tolist() == [[0.0]]
    assert pairwise_iou([], [a]).shape == (0, 1)
    assert pairwise_iou([a], []).shape == (1, 0)
    arr = random_int_boxes(rng, 4).astype(float)
    xs = [BBox(*r) for r in arr[:2]]
    ys = [BBox(*r) for r in arr[2:]]
    m = pairwise_iou(xs, ys)
    assert m.shape == (2, 2)
    for i in range(2):
        for j in range(2):
            assert m[i, j] == iou(xs[i], ys[j])


@settings(max_examples=300, deadline=None)
@given(boxes(), boxes())
def test_symmetry_bounds_and_iog_dominates(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0
    g = iog(a, b)
    assert 0.0 <= g <= 1.0
    assert g >= v


def test_symmetry_10k(rng):
    arr = rng.uniform(0, 100, size=(10_000, 4))
    a = np.column_stack([arr[:, 0], arr[:, 1], arr[:, 0] + 1 + arr[:, 2], arr[:, 1] + 1 + arr[:, 3]])
    arr = rng.uniform(0, 100, size=(10_000, 4))
    b = np.column_stack([arr[:, 0], arr[:, 1], arr[:, 0] + 1 + arr[:, 2], arr[:, 1] + 1 + arr[:, 3]])
    for ra, rb in zip(a, b):
        ba, bb = BBox(*ra), BBox(*rb)
        assert iou(ba, bb) == iou(bb, ba)


@settings(max_examples=200, deadline=None)
@given(int_boxes(), int_boxes(), st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_translation_invariance_exact(a, b, dx, dy):
    # integer coordinates keep every intermediate exact
    assert iou(a.shifted(dx, dy), b.shifted(dx, dy)) == iou(a, b)


@settings(max_examples=200, deadline=None)
@given(boxes(), boxes(), st.floats(min_value=1e-3, max_value=1e3))
def test_scale_invariance(a, b, s):
    assert iou(a.scaled(s), b.scaled(s)) == pytest.approx(iou(a, b), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(int_boxes(), int_boxes())
def test_matches_raster_oracle_exactly(a, b):
    assert iou(a, b) == raster_iou(a.as_tuple(), b.as_tuple())
    assert iog(a, b) == raster_iog(a.as_tuple(), b.as_tuple())


def test_boxes_to_array_roundtrip():
    bs = [BBox(0, 0, 1, 2), BBox(3, 4, 5, 6)]
    assert boxes_to_array(bs).shape == (2, 4)
    assert boxes_to_array([]).shape == (0, 4)
