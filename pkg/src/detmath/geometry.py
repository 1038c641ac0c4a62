"""Axis-aligned boxes and overlap metrics.

Boxes use continuous corner coordinates ``(x1, y1, x2, y2)``; width is
``x2 - x1`` with no +1 pixel correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from detmath import _kernels


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite box coordinates {coords}")
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ValueError(f"degenerate box {coords}: need x2 > x1 and y2 > y1")

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "BBox":
        return cls(x, y, x + w, y + h)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def shifted(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def scaled(self, s: float) -> "BBox":
        """Scale about the origin."""
        return BBox(self.x1 * s, self.y1 * s, self.x2 * s, self.y2 * s)


def intersection_area(a: BBox, b: BBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw < 0.0:
        iw = 0.0
    if ih < 0.0:
        ih = 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    inter = intersection_area(a, b)
    area_a, area_b = a.area, b.area
    # the union never rounds below either area, so iou <= iog holds in floats too
    return inter / max(area_a + area_b - inter, area_a, area_b)


def iog(p: BBox, g: BBox) -> float:
    """Intersection over the area of ``g`` (the ground truth)."""
    return intersection_area(p, g) / g.area


def boxes_to_array(boxes: Sequence[BBox]) -> np.ndarray:
    if len(boxes) == 0:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array([b.as_tuple() for b in boxes], dtype=np.float64)


def array_to_boxes(arr) -> list[BBox]:
    return [BBox(*map(float, row)) for row in np.asarray(arr, dtype=np.float64).reshape(-1, 4)]


def pairwise_iou(a: Sequence[BBox], b: Sequence[BBox]) -> np.ndarray:
    """IoU matrix of shape ``(len(a), len(b))``; empty inputs give an empty matrix."""
    return _kernels.pairwise_iou(boxes_to_array(a), boxes_to_array(b))
