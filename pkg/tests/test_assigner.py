import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detmath.assigner import NEGATIVE, POSITIVE, adaptive_threshold, assign_samples, best_ious
from detmath.geometry import BBox
from detmath.losses import slide_weight

GT = BBox(0, 0, 100, 100)


def strip(h):
    """Prediction whose IoU with GT is exactly h / 100."""
    return BBox(0, 0, 100, h)


def test_adaptive_threshold_examples():
    assert adaptive_threshold([0.2, 0.4, 0.6]) == pytest.approx(0.4, abs=1e-15)
    assert adaptive_threshold([0.5]) == 0.5


def test_adaptive_threshold_random_against_independent_sum(rng):
    vals = rng.uniform(0, 1, size=1000)
    total = 0.0
    for v in sorted(vals):
        total += v
    assert adaptive_threshold(vals) == pytest.approx(total / 1000, abs=1e-12)


def test_adaptive_threshold_errors():
    with pytest.raises(ValueError):
        adaptive_threshold([])
    with pytest.raises(ValueError):
        adaptive_threshold([0.5, 1.2])


def test_equal_ious_give_that_value():
    assert adaptive_threshold([0.1] * 7) == 0.1


def test_two_preds_labels():
    samples = assign_samples([strip(20), strip(60)], [GT])
    assert [s.label for s in samples] == [NEGATIVE, POSITIVE]
    assert samples[0].iou == pytest.approx(0.2)


def test_identical_single():
    (s,) = assign_samples([GT], [GT])
    assert s.iou == 1.0 and s.label == POSITIVE and s.weight == 1.0 and s.gt_index == 0


def test_three_preds_weights():
    samples = assign_samples([strip(30), strip(45), strip(80)], [GT])
    mu = (0.3 + 0.45 + 0.8) / 3
    assert [s.label for s in samples] == [NEGATIVE, NEGATIVE, POSITIVE]
    # 0.3 <= mu - 0.1; 0.45 in (mu - 0.1, mu); 0.8 >= mu
    assert samples[0].weight == 1.0
    assert samples[1].weight == pytest.approx(math.exp(1 - mu), abs=1e-12)
    assert samples[1].weight == pytest.approx(1.621470, abs=1e-6)
    assert samples[2].weight == pytest.approx(math.exp(0.2), abs=1e-12)
    for s in samples:
        assert s.weight == pytest.approx(slide_weight(s.iou, mu), abs=1e-15)


def test_ties_pick_lowest_gt():
    gts = [BBox(0, 0, 10, 10), BBox(0, 0, 10, 10)]
    (s,) = assign_samples([BBox(0, 0, 10, 10)], gts)
    assert s.gt_index == 0


def test_errors_on_empty():
    with pytest.raises(ValueError):
        assign_samples([], [GT])
    with pytest.raises(ValueError):
        assign_samples([GT], [])


def test_explicit_mu():
    samples = assign_samples([strip(30), strip(45)], [GT], mu=0.45)
    assert [s.label for s in samples] == [NEGATIVE, POSITIVE]


def test_best_ious_pools():
    assert best_ious([strip(30)], [GT]).tolist() == [pytest.approx(0.3)]
    assert best_ious([strip(30)], []).tolist() == [0.0]


preds_st = st.lists(
    st.tuples(st.integers(0, 60), st.integers(0, 60), st.integers(1, 40), st.integers(1, 40)),
    min_size=1, max_size=8,
)


def _mk(items):
    return [BBox(x, y, x + w, y + h) for x, y, w, h in items]


@settings(max_examples=150, deadline=None)
@given(preds_st, preds_st)
def test_partition_and_weights(p_items, g_items):
    preds, gts = _mk(p_items), _mk(g_items)
    samples = assign_samples(preds, gts)
    mu = adaptive_threshold([s.iou for s in samples])
    for s in samples:
        assert s.label == (POSITIVE if s.iou >= mu else NEGATIVE)
        assert s.weight >= 1.0
    pos = sorted((s for s in samples if s.is_positive), key=lambda s: s.iou)
    for lo, hi in zip(pos, pos[1:]):
        assert hi.weight <= lo.weight


@settings(max_examples=100, deadline=None)
@given(preds_st, preds_st, st.sampled_from([0.25, 0.5, 2.0, 8.0]))
def test_scale_invariance(p_items, g_items, s):
    # power-of-two scales keep every coordinate and IoU exact
    preds, gts = _mk(p_items), _mk(g_items)
    a = assign_samples(preds, gts)
    b = assign_samples([p.scaled(s) for p in preds], [g.scaled(s) for g in gts])
    assert [(x.gt_index, x.iou, x.label, x.weight) for x in a] == [(x.gt_index, x.iou, x.label, x.weight) for x in b]


@settings(max_examples=100, deadline=None)
@given(preds_st, preds_st, st.randoms(use_true_random=False))
def test_permutation_equivariance(p_items, g_items, r):
    preds, gts = _mk(p_items), _mk(g_items)
    perm = list(range(len(preds)))
    r.shuffle(perm)
    a = assign_samples(preds, gts)
    b = assign_samples([preds[i] for i in perm], gts)
    for new_pos, old in enumerate(perm):
        x, y = a[old], b[new_pos]
        assert (x.gt_index, x.iou, x.label) == (y.gt_index, y.iou, y.label)
        # fsum makes the mean independent of summation order
        assert x.weight == y.weight
