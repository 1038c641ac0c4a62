"""Gaussian box model and the normalized Wasserstein distance (NWD).

A box is modeled as an axis-aligned 2-D Gaussian with mean at the box center
and standard deviations equal to the half extents. For such Gaussians the
squared 2-Wasserstein distance reduces to the squared Euclidean distance
between ``(cx, cy, w/2, h/2)`` vectors, and ``NWD = exp(-W2 / C)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from detmath.geometry import BBox

DEFAULT_NWD_C = 12.8


@dataclass(frozen=True)
class GaussianBox:
    cx: float
    cy: float
    hw: float
    hh: float

    def __post_init__(self):
        if not (self.hw > 0 and self.hh > 0):
            raise ValueError(f"half extents must be positive, got hw={self.hw}, hh={self.hh}")

    def to_bbox(self) -> BBox:
        return BBox(self.cx - self.hw, self.cy - self.hh, self.cx + self.hw, self.cy + self.hh)


@dataclass(frozen=True)
class NwdConfig:
    """``c`` is the dataset-dependent normalizer, in pixels."""

    c: float = DEFAULT_NWD_C

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError(f"NWD constant C must be positive and finite, got {self.c}")


def box_to_gaussian(b: BBox) -> GaussianBox:
    return GaussianBox(
        (b.x1 + b.x2) / 2.0,
        (b.y1 + b.y2) / 2.0,
        (b.x2 - b.x1) / 2.0,
        (b.y2 - b.y1) / 2.0,
    )


def w2_distance(a: GaussianBox, b: GaussianBox) -> float:
    return math.sqrt(
        (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2 + (a.hw - b.hw) ** 2 + (a.hh - b.hh) ** 2
    )


def nwd(a: GaussianBox, b: GaussianBox, cfg: NwdConfig = NwdConfig()) -> float:
    return math.exp(-w2_distance(a, b) / cfg.c)


def nwd_boxes(a: BBox, b: BBox, cfg: NwdConfig = NwdConfig()) -> float:
    return nwd(box_to_gaussian(a), box_to_gaussian(b), cfg)
