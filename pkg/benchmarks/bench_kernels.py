"""Time the numba and pure-numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--sizes 200,1000,3000] [--repeat 5]

Both backends are imported directly from ``detmath._kernels`` so a single
run compares them regardless of ``DETMATH_DISABLE_NUMBA``. Outputs are
checked for equality before timing.
"""

import argparse
import time

import numpy as np

from detmath import _accel, _kernels


def random_boxes(rng, n):
    xy = rng.uniform(0, 1000, size=(n, 2))
    wh = rng.uniform(4, 80, size=(n, 2))
    return np.hstack([xy, xy + wh])


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,1000,3000")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _accel.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    warm = random_boxes(rng, 4)
    _kernels.pairwise_iou_nb(warm, warm)
    _kernels.nms_nb(warm, np.arange(4, dtype=np.int64), 0.5)
    _kernels.greedy_match_nb(warm, warm, 0.5)

    print(f"{'kernel':<14}{'n':>7}{'numpy ms':>12}{'numba ms':>12}{'speedup':>9}")
    for n in (int(s) for s in args.sizes.split(",")):
        boxes = random_boxes(rng, n)
        gts = random_boxes(rng, max(1, n // 10))
        order = np.argsort(-rng.uniform(size=n), kind="stable").astype(np.int64)
        cases = {
            "pairwise_iou": (lambda: _kernels.pairwise_iou_np(boxes, gts), lambda: _kernels.pairwise_iou_nb(boxes, gts)),
            "nms": (lambda: _kernels.nms_np(boxes, order, 0.5), lambda: _kernels.nms_nb(boxes, order, 0.5)),
            "greedy_match": (lambda: _kernels.greedy_match_np(boxes, gts, 0.5),
                             lambda: _kernels.greedy_match_nb(boxes, gts, 0.5)),
        }
        for name, (f_np, f_nb) in cases.items():
            if not np.array_equal(f_np(), f_nb()):
                raise SystemExit(f"{name}: backends disagree at n={n}")
            t_np, t_nb = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
            print(f"{name:<14}{n:>7}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
