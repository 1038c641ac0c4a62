"""Loss kernels with analytic gradients w.r.t. predicted box corners.

Gradients are returned as float64 arrays of shape ``(n_preds, 4)`` ordered
``(x1, y1, x2, y2)``. Ground-truth boxes are treated as constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from detmath.gaussian import NwdConfig
from detmath.geometry import BBox, iou

# keeps -ln(1 - x) finite for duplicated boxes
OVERLAP_CLAMP = 1.0 - 1e-7
DEFAULT_SIGMA_REPGT = 0.5
DEFAULT_SIGMA_REPBOX = 0.0
DEFAULT_EPSILON = 1e-7


@dataclass(frozen=True)
class SmoothLnConfig:
    sigma: float = DEFAULT_SIGMA_REPGT

    def __post_init__(self):
        if not (0.0 <= self.sigma < 1.0):
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma}")


@dataclass(frozen=True)
class RegMixConfig:
    alpha_iou: float = 0.5
    alpha_nwd: float = 0.5

    def __post_init__(self):
        for name in ("alpha_iou", "alpha_nwd"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if abs(self.alpha_iou + self.alpha_nwd - 1.0) > 1e-12:
            raise ValueError(
                f"alpha_iou + alpha_nwd must equal 1, got {self.alpha_iou} + {self.alpha_nwd}"
            )

    @classmethod
    def from_iou_weight(cls, alpha_iou: float) -> "RegMixConfig":
        return cls(alpha_iou, 1.0 - alpha_iou)


@dataclass
class LossValue:
    value: float
    grad: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))


# --- smooth_ln ---------------------------------------------------------------


def smooth_ln(x: float, cfg: SmoothLnConfig = SmoothLnConfig()) -> float:
    if not (0.0 <= x < 1.0):
        raise ValueError(f"smooth_ln is defined on [0, 1), got {x}")
    s = cfg.sigma
    if x <= s:
        return -math.log1p(-x)
    return (x - s) / (1.0 - s) - math.log1p(-s)


def smooth_ln_grad(x: float, cfg: SmoothLnConfig = SmoothLnConfig()) -> float:
    if not (0.0 <= x < 1.0):
        raise ValueError(f"smooth_ln is defined on [0, 1), got {x}")
    if x <= cfg.sigma:
        return 1.0 / (1.0 - x)
    return 1.0 / (1.0 - cfg.sigma)


def _clamped_smooth_ln(x: float, cfg: SmoothLnConfig) -> tuple[float, float]:
    """Value and derivative after clamping ``x`` into ``[0, OVERLAP_CLAMP]``."""
    if x > OVERLAP_CLAMP:
        return smooth_ln(OVERLAP_CLAMP, cfg), 0.0
    x = max(x, 0.0)
    return smooth_ln(x, cfg), smooth_ln_grad(x, cfg)


# --- overlap gradients --------------------------------------------------------


def _interval_overlap(a1, a2, b1, b2):
    """Overlap length of [a1, a2] and [b1, b2] and its partials w.r.t. all four ends."""
    lo_a = a1 >= b1
    hi_a = a2 <= b2
    length = (a2 if hi_a else b2) - (a1 if lo_a else b1)
    # (d/da1, d/da2, d/db1, d/db2)
    return length, (
        -1.0 if lo_a else 0.0,
        1.0 if hi_a else 0.0,
        0.0 if lo_a else -1.0,
        0.0 if hi_a else 1.0,
    )


def _intersection_grad(a: BBox, b: BBox):
    """Intersection area with gradients w.r.t. the corners of ``a`` and of ``b``."""
    iw, dw = _interval_overlap(a.x1, a.x2, b.x1, b.x2)
    ih, dh = _interval_overlap(a.y1, a.y2, b.y1, b.y2)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0, np.zeros(4), np.zeros(4)
    ga = np.array([ih * dw[0], iw * dh[0], ih * dw[1], iw * dh[1]])
    gb = np.array([ih * dw[2], iw * dh[2], ih * dw[3], iw * dh[3]])
    return iw * ih, ga, gb


def _area_grad(b: BBox) -> np.ndarray:
    w, h = b.width, b.height
    return np.array([-h, -w, h, w])


def iou_with_grad(a: BBox, b: BBox):
    """IoU and its gradients w.r.t. ``a`` and ``b``."""
    inter, di_a, di_b = _intersection_grad(a, b)
    union = max(a.area + b.area - inter, a.area, b.area)
    value = inter / union
    if inter == 0.0:
        return value, np.zeros(4), np.zeros(4)
    du_a = _area_grad(a) - di_a
    du_b = _area_grad(b) - di_b
    ga = (di_a * union - inter * du_a) / (union * union)
    gb = (di_b * union - inter * du_b) / (union * union)
    return value, ga, gb


def iog_with_grad(p: BBox, g: BBox):
    """IoG and its gradient w.r.t. ``p`` only."""
    inter, di_p, _ = _intersection_grad(p, g)
    area_g = g.area
    return inter / area_g, di_p / area_g


def nwd_with_grad(p: BBox, g: BBox, cfg: NwdConfig):
    """NWD and its gradient w.r.t. ``p``; the gradient is set to 0 where W2 = 0."""
    dcx = (p.x1 + p.x2) / 2.0 - (g.x1 + g.x2) / 2.0
    dcy = (p.y1 + p.y2) / 2.0 - (g.y1 + g.y2) / 2.0
    dhw = (p.x2 - p.x1) / 2.0 - (g.x2 - g.x1) / 2.0
    dhh = (p.y2 - p.y1) / 2.0 - (g.y2 - g.y1) / 2.0
    w2 = math.sqrt(dcx * dcx + dcy * dcy + dhw * dhw + dhh * dhh)
    value = math.exp(-w2 / cfg.c)
    if w2 == 0.0:
        return value, np.zeros(4)
    dw2 = np.array([dcx - dhw, dcy - dhh, dcx + dhw, dcy + dhh]) * (0.5 / w2)
    return value, -value / cfg.c * dw2


# --- repulsion ---------------------------------------------------------------


def _check_assignment(preds, assigned_gt, n_gts=None):
    if len(preds) != len(assigned_gt):
        raise ValueError(f"{len(preds)} predictions but {len(assigned_gt)} assignments")
    for i, g in enumerate(assigned_gt):
        if g < 0 or (n_gts is not None and g >= n_gts):
            raise ValueError(f"prediction {i} assigned to out-of-range gt index {g}")


def repulsion_target(pred: BBox, own_gt: int, gts: Sequence[BBox]) -> int | None:
    """Index of the non-target gt with the largest IoU (ties to the lowest index)."""
    best, best_iou = None, -1.0
    for j, g in enumerate(gts):
        if j == own_gt:
            continue
        v = iou(pred, g)
        if v > best_iou:
            best, best_iou = j, v
    return best


def repgt_loss(
    preds: Sequence[BBox],
    assigned_gt: Sequence[int],
    gts: Sequence[BBox],
    cfg: SmoothLnConfig = SmoothLnConfig(DEFAULT_SIGMA_REPGT),
) -> LossValue:
    """Mean smooth-ln IoG between each positive prediction and its repulsion gt."""
    n = len(preds)
    _check_assignment(preds, assigned_gt, len(gts))
    grad = np.zeros((n, 4))
    if n == 0:
        return LossValue(0.0, grad)
    if len(gts) == 0:
        raise ValueError("repgt_loss needs at least one ground-truth box")
    total = 0.0
    for i, (p, own) in enumerate(zip(preds, assigned_gt)):
        j = repulsion_target(p, own, gts)
        if j is None:
            continue
        x, dx = iog_with_grad(p, gts[j])
        if x == 0.0:
            continue
        v, dv = _clamped_smooth_ln(x, cfg)
        total += v
        grad[i] = dv * dx
    return LossValue(total / n, grad / n)


def repbox_loss(
    preds: Sequence[BBox],
    assigned_gt: Sequence[int],
    cfg: SmoothLnConfig = SmoothLnConfig(DEFAULT_SIGMA_REPBOX),
    epsilon: float = DEFAULT_EPSILON,
) -> LossValue:
    """Smooth-ln IoU summed over cross-group prediction pairs, normalized by
    the number of overlapping pairs plus ``epsilon``. Each unordered pair is
    counted once."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    _check_assignment(preds, assigned_gt)
    n = len(preds)
    grad = np.zeros((n, 4))
    total = 0.0
    overlapping = 0
    for i in range(n):
        for j in range(i + 1, n):
            if assigned_gt[i] == assigned_gt[j]:
                continue
            x, ga, gb = iou_with_grad(preds[i], preds[j])
            if x <= 0.0:
                continue
            overlapping += 1
            v, dv = _clamped_smooth_ln(x, cfg)
            total += v
            grad[i] += dv * ga
            grad[j] += dv * gb
    denom = overlapping + epsilon
    return LossValue(total / denom, grad / denom)


# --- sample weighting ---------------------------------------------------------


def slide_weight(x: float, mu: float) -> float:
    """Slide weight: 1 up to ``mu - 0.1``, ``e^(1-mu)`` on ``(mu - 0.1, mu)``,
    ``e^(1-x)`` from ``mu`` on."""
    if not (0.0 < mu < 1.0):
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x <= mu - 0.1:
        return 1.0
    if x < mu:
        return math.exp(1.0 - mu)
    return math.exp(1.0 - x)


# --- box regression -----------------------------------------------------------


def regression_loss(
    pred: BBox,
    gt: BBox,
    mix: RegMixConfig = RegMixConfig(),
    nwd_cfg: NwdConfig = NwdConfig(),
) -> LossValue:
    """``alpha_iou * (1 - IoU) + alpha_nwd * (1 - NWD)``."""
    value = 0.0
    grad = np.zeros(4)
    if mix.alpha_iou > 0.0:
        v, g, _ = iou_with_grad(pred, gt)
        value += mix.alpha_iou * (1.0 - v)
        grad -= mix.alpha_iou * g
    if mix.alpha_nwd > 0.0:
        v, g = nwd_with_grad(pred, gt, nwd_cfg)
        value += mix.alpha_nwd * (1.0 - v)
        grad -= mix.alpha_nwd * g
    return LossValue(value, grad.reshape(1, 4))
