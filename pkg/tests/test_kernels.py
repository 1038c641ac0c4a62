import os
import subprocess
import sys

import numpy as np
import pytest

from detmath import _accel, _kernels, backend_name


def _boxes(rng, n):
    xy = rng.uniform(0, 100, size=(n, 2))
    wh = rng.uniform(0.5, 30, size=(n, 2))
    return np.hstack([xy, xy + wh])


@pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")
def test_pairwise_iou_backends_agree(rng):
    a, b = _boxes(rng, 40), _boxes(rng, 25)
    np.testing.assert_array_equal(_kernels.pairwise_iou_np(a, b), _kernels.pairwise_iou_nb(a, b))


@pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")
def test_nms_backends_agree(rng):
    boxes = _boxes(rng, 200)
    order = np.argsort(-rng.uniform(size=200), kind="stable").astype(np.int64)
    for thr in (0.0, 0.3, 0.5, 1.0):
        np.testing.assert_array_equal(_kernels.nms_np(boxes, order, thr), _kernels.nms_nb(boxes, order, thr))


@pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")
def test_match_backends_agree(rng):
    for _ in range(20):
        dets, gts = _boxes(rng, 30), _boxes(rng, 10)
        for thr in (0.1, 0.5):
            np.testing.assert_array_equal(_kernels.greedy_match_np(dets, gts, thr), _kernels.greedy_match_nb(dets, gts, thr))


def test_empty_inputs():
    e = np.zeros((0, 4))
    for fn in (_kernels.pairwise_iou_np, _kernels.pairwise_iou):
        assert fn(e, _boxes(np.random.default_rng(0), 3)).shape == (0, 3)
    assert len(_kernels.greedy_match(_boxes(np.random.default_rng(0), 2), e, 0.5)) == 2
    assert not _kernels.greedy_match(_boxes(np.random.default_rng(0), 2), e, 0.5).any()


def test_env_flag_selects_numpy():
    env = dict(os.environ, DETMATH_DISABLE_NUMBA="1")
    code = "import detmath; print(detmath.backend_name())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backend_name_matches_flag():
    assert backend_name() == ("numba" if _accel.USE_NUMBA else "numpy")
