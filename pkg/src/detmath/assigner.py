"""Positive/negative partition by the mean-IoU threshold, with Slide weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from detmath.geometry import BBox, pairwise_iou
from detmath.losses import slide_weight

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class Sample:
    pred_index: int
    gt_index: int | None
    iou: float
    label: str
    weight: float

    @property
    def is_positive(self) -> bool:
        return self.label == POSITIVE


def adaptive_threshold(ious: Sequence[float]) -> float:
    """Mean of the candidate IoUs.

    The exactly rounded sum is used and the result is clipped into
    ``[min, max]`` so that a set of equal IoUs yields exactly that IoU.
    """
    values = [float(v) for v in ious]
    if not values:
        raise ValueError("adaptive_threshold needs at least one IoU")
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"IoU {v} outside [0, 1]")
    mu = math.fsum(values) / len(values)
    return min(max(mu, min(values)), max(values))


def _weight(iou: float, mu: float) -> float:
    # slide_weight is only defined for mu in (0, 1); the endpoints occur when
    # every candidate misses (mu = 0) or all are perfect (mu = 1).
    # Every sample then sits on the x >= mu branch.
    if not 0.0 < mu < 1.0:
        return math.exp(1.0 - iou)
    return slide_weight(iou, mu)


def assign_samples(
    preds: Sequence[BBox],
    gts: Sequence[BBox],
    mu: float | None = None,
) -> list[Sample]:
    """Match each prediction to its best-IoU gt and label it against ``mu``.

    ``mu`` defaults to the mean best-IoU of this call's predictions. Pass a
    value computed over several images to share one threshold across them.
    IoU exactly equal to ``mu`` counts as positive.
    """
    if len(preds) == 0 or len(gts) == 0:
        raise ValueError("assign_samples needs at least one prediction and one gt")
    ious = pairwise_iou(preds, gts)
    best_gt = np.argmax(ious, axis=1)
    best_iou = ious[np.arange(len(preds)), best_gt]
    if mu is None:
        mu = adaptive_threshold(best_iou)
    samples = []
    for i, (g, v) in enumerate(zip(best_gt, best_iou)):
        v = float(v)
        label = POSITIVE if v >= mu else NEGATIVE
        samples.append(Sample(i, int(g), v, label, _weight(v, mu)))
    return samples


def best_ious(preds: Sequence[BBox], gts: Sequence[BBox]) -> np.ndarray:
    """Per-prediction best IoU, for pooling a threshold across images."""
    if len(preds) == 0:
        return np.zeros(0)
    if len(gts) == 0:
        return np.zeros(len(preds))
    return pairwise_iou(preds, gts).max(axis=1)
