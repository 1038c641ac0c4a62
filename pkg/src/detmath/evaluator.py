"""Detection matching, precision/recall curves and average precision.

AP uses continuous all-points interpolation: precision at each recall level
is replaced by the best precision reached at that recall or higher, and
the curve is integrated over recall steps. Each subset is scored on its own
ground-truth list; no subset is treated as containing another.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from detmath import _kernels
from detmath.geometry import BBox, boxes_to_array
from detmath.nms import Detection, score_order

DEFAULT_EVAL_IOU = 0.5


@dataclass
class EvalRecord:
    image_path: str
    detections: list[Detection]
    gts: list[BBox]
    subset: str


@dataclass
class PrCurve:
    points: list[tuple[float, float, float]] = field(default_factory=list)
    ap: float = 0.0
    total_gt: int = 0
    num_detections: int = 0


def match_and_score(dets: Sequence[Detection], gts: Sequence[BBox], iou_threshold: float = DEFAULT_EVAL_IOU) -> list[bool]:
    """TP flag per detection, in the input order of ``dets``.

    Detections are visited by descending score (ties in input order); each
    takes its best-IoU still-unmatched gt if that IoU reaches the threshold.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold}")
    if not dets:
        return []
    order = score_order([d.score for d in dets])
    det_arr = boxes_to_array([dets[i].box for i in order])
    flags_sorted = _kernels.greedy_match(det_arr, boxes_to_array(gts), float(iou_threshold))
    flags = np.zeros(len(dets), dtype=bool)
    flags[order] = flags_sorted
    return [bool(f) for f in flags]


def average_precision(scores: Sequence[float], flags: Sequence[bool], total_gt: int) -> PrCurve:
    """PR curve with one point per distinct score, and all-points AP.

    With no ground truth, AP is 1.0 when there are also no detections and 0.0
    otherwise; recall is reported as 0 in that case.
    """
    if total_gt < 0:
        raise ValueError(f"total_gt must be >= 0, got {total_gt}")
    if len(scores) != len(flags):
        raise ValueError("scores and flags differ in length")
    n = len(scores)
    if n == 0:
        return PrCurve([], 1.0 if total_gt == 0 else 0.0, total_gt, 0)
    scores = np.asarray(scores, dtype=np.float64)
    order = score_order(scores)
    s = scores[order]
    tp = np.cumsum(np.asarray(flags, dtype=np.int64)[order])
    fp = np.arange(1, n + 1) - tp
    # last index of each run of equal scores
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp, fp, thr = tp[ends], fp[ends], s[ends]
    precision = tp / (tp + fp)
    recall = tp / total_gt if total_gt > 0 else np.zeros(len(tp))
    points = [(float(t), float(p), float(r)) for t, p, r in zip(thr, precision, recall)]
    if total_gt == 0:
        return PrCurve(points, 0.0, 0, n)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.diff(np.concatenate(([0.0], recall)))
    ap = float(np.sum(steps * envelope))
    return PrCurve(points, ap, total_gt, n)


def _match_record(rec: EvalRecord, iou_threshold: float):
    flags = match_and_score(rec.detections, rec.gts, iou_threshold)
    return [d.score for d in rec.detections], flags, len(rec.gts)


def evaluate(
    records: Sequence[EvalRecord],
    iou_threshold: float = DEFAULT_EVAL_IOU,
    workers: int | None = None,
) -> dict[str, PrCurve]:
    """One PR curve per subset, pooling detections over that subset's images.

    Images are matched independently (in a thread pool when ``workers > 1``)
    and merged in image-path order, so the result does not depend on record
    order or on the worker count.
    """
    if not records:
        raise ValueError("evaluate needs at least one record")
    ordered = sorted(records, key=lambda r: r.image_path)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            matched = list(pool.map(lambda r: _match_record(r, iou_threshold), ordered))
    else:
        matched = [_match_record(r, iou_threshold) for r in ordered]
    pooled: dict[str, tuple[list[float], list[bool], list[int]]] = {}
    for rec, (scores, flags, n_gt) in zip(ordered, matched):
        s, f, g = pooled.setdefault(rec.subset, ([], [], []))
        s.extend(scores)
        f.extend(flags)
        g.append(n_gt)
    return {
        subset: average_precision(s, f, sum(g))
        for subset, (s, f, g) in sorted(pooled.items())
    }
