"""Hot loops: pairwise IoU, greedy NMS and greedy detection matching.

Every kernel exists twice, a numba-compiled loop (``*_nb``) and a numpy
version (``*_np``). Both evaluate IoU as ``inter / max(area_a + area_b - inter,
area_a, area_b)`` in the same operation order, so the two paths agree bit for
bit. The public names at the bottom are bound according to
:mod:`detmath._accel`.

All box arrays are float64 with shape (n, 4) in corner form.
"""

import numpy as np

from detmath._accel import USE_NUMBA, njit


def pairwise_iou_np(a, b):
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
    union = area_a[:, None] + area_b[None, :] - inter
    union = np.maximum(np.maximum(union, area_a[:, None]), area_b[None, :])
    return inter / union


@njit
def _iou_pair(ax1, ay1, ax2, ay2, bx1, by1, bx2, by2):
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw < 0.0:
        iw = 0.0
    if ih < 0.0:
        ih = 0.0
    inter = iw * ih
    return inter / max(area_a + area_b - inter, area_a, area_b)


@njit
def pairwise_iou_nb(a, b):
    n = a.shape[0]
    m = b.shape[0]
    out = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            out[i, j] = _iou_pair(a[i, 0], a[i, 1], a[i, 2], a[i, 3],
                                  b[j, 0], b[j, 1], b[j, 2], b[j, 3])
    return out


def nms_np(boxes, order, iou_threshold):
    """Greedy suppression over ``order`` (indices sorted by descending score)."""
    keep = []
    remaining = np.asarray(order, dtype=np.int64)
    while remaining.size:
        top = remaining[0]
        keep.append(int(top))
        rest = remaining[1:]
        if rest.size == 0:
            break
        ious = pairwise_iou_np(boxes[top:top + 1], boxes[rest])[0]
        remaining = rest[ious <= iou_threshold]
    return np.array(keep, dtype=np.int64)


@njit
def nms_nb(boxes, order, iou_threshold):
    n = order.shape[0]
    suppressed = np.zeros(n, dtype=np.bool_)
    keep = np.empty(n, dtype=np.int64)
    count = 0
    for p in range(n):
        if suppressed[p]:
            continue
        i = order[p]
        keep[count] = i
        count += 1
        for q in range(p + 1, n):
            if suppressed[q]:
                continue
            j = order[q]
            iou = _iou_pair(boxes[i, 0], boxes[i, 1], boxes[i, 2], boxes[i, 3],
                            boxes[j, 0], boxes[j, 1], boxes[j, 2], boxes[j, 3])
            if iou > iou_threshold:
                suppressed[q] = True
    return keep[:count]


def greedy_match_np(dets, gts, iou_threshold):
    """``dets`` must already be in processing order. Returns a bool TP flag per det."""
    flags = np.zeros(dets.shape[0], dtype=np.bool_)
    if dets.shape[0] == 0 or gts.shape[0] == 0:
        return flags
    ious = pairwise_iou_np(dets, gts)
    taken = np.zeros(gts.shape[0], dtype=np.bool_)
    for d in range(dets.shape[0]):
        row = np.where(taken, -1.0, ious[d])
        g = int(np.argmax(row))
        if row[g] >= iou_threshold:
            flags[d] = True
            taken[g] = True
    return flags


@njit
def greedy_match_nb(dets, gts, iou_threshold):
    n = dets.shape[0]
    m = gts.shape[0]
    flags = np.zeros(n, dtype=np.bool_)
    taken = np.zeros(m, dtype=np.bool_)
    for d in range(n):
        best = -1.0
        best_g = -1
        for g in range(m):
            if taken[g]:
                continue
            iou = _iou_pair(dets[d, 0], dets[d, 1], dets[d, 2], dets[d, 3],
                            gts[g, 0], gts[g, 1], gts[g, 2], gts[g, 3])
            if iou > best:
                best = iou
                best_g = g
        if best_g >= 0 and best >= iou_threshold:
            flags[d] = True
            taken[best_g] = True
    return flags


if USE_NUMBA:
    pairwise_iou = pairwise_iou_nb
    nms = nms_nb
    greedy_match = greedy_match_nb
else:
    pairwise_iou = pairwise_iou_np
    nms = nms_np
    greedy_match = greedy_match_np
