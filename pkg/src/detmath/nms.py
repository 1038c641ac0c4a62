"""Greedy class-agnostic NMS and grouping of predictions by assigned target."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from detmath import _kernels
from detmath.geometry import BBox, boxes_to_array

DEFAULT_NMS_IOU = 0.5


@dataclass(frozen=True)
class Detection:
    box: BBox
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


def score_order(scores) -> np.ndarray:
    """Indices by descending score; equal scores keep their original order."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.argsort(-scores, kind="stable").astype(np.int64)


def nms(dets: Sequence[Detection], iou_threshold: float = DEFAULT_NMS_IOU) -> list[int]:
    """Indices of kept detections, in keep order (highest score first).

    A detection survives iff its IoU with every previously kept detection is
    at most ``iou_threshold``.
    """
    if not (0.0 <= iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold must lie in [0, 1], got {iou_threshold}")
    if len(dets) == 0:
        return []
    boxes = boxes_to_array([d.box for d in dets])
    order = score_order([d.score for d in dets])
    return [int(i) for i in _kernels.nms(boxes, order, float(iou_threshold))]


def partition_by_target(assigned_gt: Sequence[int]) -> list[list[int]]:
    """Group prediction indices by their gt index, groups ordered by gt index."""
    groups: dict[int, list[int]] = {}
    for i, g in enumerate(assigned_gt):
        if g < 0:
            raise ValueError(f"prediction {i} has negative gt index {g}")
        groups.setdefault(int(g), []).append(i)
    return [groups[g] for g in sorted(groups)]
