import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detmath.geometry import BBox, iou
from detmath.nms import Detection, nms, partition_by_target, score_order


def test_examples():
    a = Detection(BBox(0, 0, 2, 2), 0.9)
    assert nms([a]) == [0]
    b = Detection(BBox(1, 1, 3, 3), 0.8)
    assert iou(a.box, b.box) == pytest.approx(1 / 7)
    assert nms([a, b], 0.5) == [0, 1]
    assert nms([Detection(BBox(0, 0, 2, 2), 0.8), a], 0.5) == [1]
    assert nms([]) == []


def test_ties_break_by_index():
    box = BBox(0, 0, 4, 4)
    assert nms([Detection(box, 0.5), Detection(box, 0.5)]) == [0]
    assert score_order([0.5, 0.7, 0.5, 0.7]).tolist() == [1, 3, 0, 2]


def test_threshold_validation():
    with pytest.raises(ValueError):
        nms([], 1.5)
    with pytest.raises(ValueError):
        Detection(BBox(0, 0, 1, 1), 1.2)


def test_partition_examples():
    assert partition_by_target([0, 0, 1]) == [[0, 1], [2]]
    assert partition_by_target([2]) == [[0]]
    assert partition_by_target([1, 0, 1, 0]) == [[1, 3], [0, 2]]
    assert partition_by_target([]) == []
    with pytest.raises(ValueError):
        partition_by_target([0, -1])


det_st = st.lists(
    st.tuples(st.integers(0, 40), st.integers(0, 40), st.integers(1, 20), st.integers(1, 20),
              st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9, 1.0])),
    max_size=25,
)


def _dets(items):
    return [Detection(BBox(x, y, x + w, y + h), s) for x, y, w, h, s in items]


@settings(max_examples=200, deadline=None)
@given(det_st, st.sampled_from([0.0, 0.3, 0.5, 0.7]))
def test_nms_properties(items, thr):
    dets = _dets(items)
    kept = nms(dets, thr)
    assert len(set(kept)) == len(kept)
    scores = [dets[i].score for i in kept]
    assert scores == sorted(scores, reverse=True)
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            assert iou(dets[a].box, dets[b].box) <= thr
    # every suppressed detection overlaps some kept one that outranks it
    rank = {int(j): r for r, j in enumerate(score_order([d.score for d in dets]))}
    for j in set(range(len(dets))) - set(kept):
        assert any(iou(dets[j].box, dets[k].box) > thr and rank[k] < rank[j] for k in kept)


@settings(max_examples=100, deadline=None)
@given(det_st)
def test_threshold_one_keeps_all(items):
    dets = _dets(items)
    kept = nms(dets, 1.0)
    assert sorted(kept) == list(range(len(dets)))
    assert kept == score_order([d.score for d in dets]).tolist()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), max_size=30))
def test_partition_covers(assigned):
    groups = partition_by_target(assigned)
    flat = [i for g in groups for i in g]
    assert sorted(flat) == list(range(len(assigned)))
    for g in groups:
        assert g == sorted(g)
        assert len({assigned[i] for i in g}) == 1
