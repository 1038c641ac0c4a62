"""Anchor-set generation and face aspect-ratio statistics."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from detmath.geometry import BBox

DEFAULT_BASE = 16.0
DEFAULT_STRIDES = (4, 8, 16)
DEFAULT_OCTAVES = 3
DEFAULT_RATIO = 1.2  # height / width


@dataclass(frozen=True)
class AnchorSpec:
    layer: str
    stride: int
    ratio: float
    scales: tuple[float, ...]

    def __post_init__(self):
        if not self.ratio > 0:
            raise ValueError(f"ratio must be positive, got {self.ratio}")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError(f"scales must be strictly increasing, got {self.scales}")

    def rounded_scales(self, ndigits: int = 2) -> tuple[float, ...]:
        return tuple(round(s, ndigits) for s in self.scales)

    def sizes(self, convention: str = "area") -> list[tuple[float, float]]:
        return [anchor_wh(s, self.ratio, convention) for s in self.scales]


def anchor_wh(scale: float, ratio: float, convention: str = "area") -> tuple[float, float]:
    """Anchor (w, h) for an edge ``scale`` and height/width ``ratio``.

    ``"area"`` keeps ``sqrt(w * h) == scale``; ``"width"`` fixes ``w = scale``
    and stretches the height.
    """
    if convention == "area":
        r = math.sqrt(ratio)
        return scale / r, scale * r
    if convention == "width":
        return scale, scale * ratio
    raise ValueError(f"unknown anchor convention {convention!r}")


def layer_name(stride: int) -> str:
    level = math.log2(stride)
    return f"P{int(level)}" if level.is_integer() else f"S{stride}"


def generate_anchor_set(
    base: float = DEFAULT_BASE,
    strides: Sequence[int] = DEFAULT_STRIDES,
    octaves: int = DEFAULT_OCTAVES,
    ratio: float = DEFAULT_RATIO,
) -> list[AnchorSpec]:
    """Per level, scales ``level_base * 2**(k/3)`` for ``k < octaves``.

    ``level_base`` is ``base`` at the first stride and grows in proportion to
    the stride, so it doubles whenever the stride doubles.
    """
    if not base > 0:
        raise ValueError(f"base must be positive, got {base}")
    if octaves < 1:
        raise ValueError(f"octaves must be >= 1, got {octaves}")
    if not strides:
        raise ValueError("at least one stride is required")
    if any(s < 1 for s in strides):
        raise ValueError(f"strides must be positive, got {list(strides)}")
    specs = []
    for stride in strides:
        level_base = base * stride / strides[0]
        scales = tuple(level_base * 2.0 ** (k / 3.0) for k in range(octaves))
        specs.append(AnchorSpec(layer_name(stride), int(stride), float(ratio), scales))
    return specs


def format_scale(v: float) -> str:
    r = round(v, 2)
    return str(int(r)) if r.is_integer() else f"{r:.2f}"


def format_anchor_table(specs: Sequence[AnchorSpec]) -> str:
    rows = [("Layer", "Stride", "Ratio", "Anchor")]
    for s in specs:
        rows.append((s.layer, str(s.stride), f"{s.ratio:g}",
                     "[" + ", ".join(format_scale(v) for v in s.scales) + "]"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def anchor_table_data(specs: Sequence[AnchorSpec], convention: str = "area") -> list[dict]:
    return [
        {"layer": s.layer, "stride": s.stride, "ratio": s.ratio,
         "scales": list(s.rounded_scales()), "scales_full": list(s.scales),
         "sizes_wh": [[round(w, 2), round(h, 2)] for w, h in s.sizes(convention)]}
        for s in specs
    ]


# histogram of h/w over [0, 3] in 0.1 steps; values past the last edge are overflow
HIST_EDGES = tuple(round(0.1 * i, 1) for i in range(31))


@dataclass
class RatioStats:
    count: int
    mean: float
    median: float
    edges: tuple[float, ...]
    counts: list[int] = field(default_factory=list)
    overflow: int = 0

    def as_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean, "median": self.median,
                "edges": list(self.edges), "counts": self.counts, "overflow": self.overflow}


def aspect_ratio_stats(gts: Sequence[BBox], edges: Sequence[float] = HIST_EDGES) -> RatioStats:
    """Height/width ratio summary of ground-truth boxes."""
    if len(gts) == 0:
        raise ValueError("aspect_ratio_stats needs at least one box")
    ratios = [b.height / b.width for b in gts]
    arr = np.array(ratios)
    counts, _ = np.histogram(arr, bins=np.asarray(edges))
    overflow = int(np.sum(arr > edges[-1]))
    return RatioStats(
        count=len(ratios),
        mean=math.fsum(ratios) / len(ratios),
        median=statistics.median(ratios),
        edges=tuple(edges),
        counts=[int(c) for c in counts],
        overflow=overflow,
    )
