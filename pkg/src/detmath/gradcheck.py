"""Central finite-difference verification of the analytic loss gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from detmath.gaussian import NwdConfig
from detmath.geometry import BBox, array_to_boxes
from detmath.losses import (
    DEFAULT_EPSILON,
    LossValue,
    RegMixConfig,
    SmoothLnConfig,
    regression_loss,
    repbox_loss,
    repgt_loss,
)

# mixes with both weights nonzero, plus the two pure cases
DEFAULT_MIXES = ((1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (0.4, 0.6), (0.6, 0.4))


@dataclass
class GradCheckReport:
    max_rel_error: float
    passed: bool
    checked: int
    skipped: list[int] = field(default_factory=list)
    analytic: np.ndarray | None = None
    numeric: np.ndarray | None = None


def relative_error(a: float, n: float, floor: float = 1e-8) -> float:
    """``|a - n| / max(|a|, |n|, floor)``; the floor keeps near-zero partials from
    amplifying round-off."""
    return abs(a - n) / max(abs(a), abs(n), floor)


def finite_diff_check(
    loss: Callable[[np.ndarray], LossValue],
    x0: np.ndarray,
    step: float = 1e-4,
    tol: float = 1e-4,
    kink_tol: float = 1e-3,
) -> GradCheckReport:
    """Compare ``loss(x).grad`` against central differences at ``x0``.

    ``loss`` maps a flat-or-shaped coordinate array to a :class:`LossValue`.
    A coordinate whose forward and backward one-sided slopes disagree by more
    than ``kink_tol`` (relative) sits within ``step`` of a seam; it is skipped
    and listed in ``skipped`` rather than counted as a failure.
    """
    if not (step > 0 and tol > 0):
        raise ValueError("step and tol must be positive")
    x0 = np.array(x0, dtype=np.float64)
    base = loss(x0)
    analytic = np.asarray(base.grad, dtype=np.float64).reshape(-1)
    flat = x0.reshape(-1)
    if analytic.size != flat.size:
        raise ValueError(f"gradient has {analytic.size} entries for {flat.size} inputs")
    numeric = np.zeros_like(analytic)
    worst = 0.0
    skipped = []
    for k in range(flat.size):
        xp = flat.copy()
        xm = flat.copy()
        xp[k] += step
        xm[k] -= step
        try:
            fp = loss(xp.reshape(x0.shape)).value
            fm = loss(xm.reshape(x0.shape)).value
        except ValueError:
            # the perturbation produced a degenerate box
            skipped.append(k)
            continue
        fwd = (fp - base.value) / step
        bwd = (base.value - fm) / step
        numeric[k] = (fp - fm) / (2.0 * step)
        if relative_error(fwd, bwd, floor=1.0) > kink_tol:
            skipped.append(k)
            continue
        worst = max(worst, relative_error(analytic[k], numeric[k]))
    checked = flat.size - len(skipped)
    return GradCheckReport(
        max_rel_error=float(worst),
        passed=bool(worst < tol),
        checked=checked,
        skipped=skipped,
        analytic=analytic,
        numeric=numeric,
    )


# --- random smooth evaluation points ----------------------------------------


def random_box(rng: np.random.Generator, field_size: float = 96.0, lo: float = 8.0, hi: float = 48.0) -> BBox:
    w, h = rng.uniform(lo, hi, size=2)
    x, y = rng.uniform(0.0, field_size - lo, size=2)
    return BBox(x, y, x + w, y + h)


def jitter(rng: np.random.Generator, b: BBox, frac: float = 0.35) -> BBox:
    w, h = b.width, b.height
    d = rng.uniform(-frac, frac, size=4) * np.array([w, h, w, h])
    arr = np.array(b.as_tuple()) + d
    if arr[2] - arr[0] < 1.0:
        arr[2] = arr[0] + 1.0
    if arr[3] - arr[1] < 1.0:
        arr[3] = arr[1] + 1.0
    return BBox(*map(float, arr))


def _clear_of_seams(boxes: list[BBox], margin: float) -> bool:
    """True when no two boxes share an edge coordinate to within ``margin``."""
    for axis in (0, 1):
        coords = np.array([[b.as_tuple()[axis], b.as_tuple()[axis + 2]] for b in boxes]).ravel()
        owner = np.repeat(np.arange(len(boxes)), 2)
        diff = np.abs(coords[:, None] - coords[None, :])
        other = owner[:, None] != owner[None, :]
        if np.any(diff[other] < margin):
            return False
    return True


@dataclass
class SuiteResult:
    name: str
    points: int
    max_rel_error: float
    resampled: int
    passed: bool


def _run_points(name, make_point, n_points, rng, step, tol, max_tries=50):
    worst = 0.0
    resampled = 0
    done = 0
    while done < n_points:
        for _ in range(max_tries):
            fn, x0 = make_point(rng)
            if fn is None:
                resampled += 1
                continue
            report = finite_diff_check(fn, x0, step=step, tol=tol)
            if report.skipped or report.checked == 0:
                resampled += 1
                continue
            break
        else:
            raise RuntimeError(f"{name}: could not find a smooth evaluation point")
        worst = max(worst, report.max_rel_error)
        done += 1
    return SuiteResult(name, n_points, float(worst), resampled, bool(worst < tol))


def regression_point_factory(mix: RegMixConfig, nwd_cfg: NwdConfig, margin: float):
    def make(rng):
        gt = random_box(rng)
        pred = jitter(rng, gt)
        if not _clear_of_seams([pred, gt], margin):
            return None, None

        def fn(x):
            return regression_loss(BBox(*x.reshape(4)), gt, mix, nwd_cfg)

        return fn, np.array(pred.as_tuple())

    return make


def repgt_point_factory(cfg: SmoothLnConfig, margin: float, n_preds: int = 3, n_gts: int = 3):
    def make(rng):
        gts = [random_box(rng, field_size=48.0) for _ in range(n_gts)]
        assigned = [int(rng.integers(n_gts)) for _ in range(n_preds)]
        preds = [jitter(rng, gts[a]) for a in assigned]
        if not _clear_of_seams(preds + gts, margin):
            return None, None

        def fn(x):
            return repgt_loss(array_to_boxes(x), assigned, gts, cfg)

        if repgt_loss(preds, assigned, gts, cfg).value == 0.0:
            return None, None
        return fn, np.array([p.as_tuple() for p in preds])

    return make


def repbox_point_factory(cfg: SmoothLnConfig, epsilon: float, margin: float, n_preds: int = 4):
    def make(rng):
        gts = [random_box(rng, field_size=40.0) for _ in range(2)]
        assigned = [i % 2 for i in range(n_preds)]
        preds = [jitter(rng, gts[a]) for a in assigned]
        if not _clear_of_seams(preds, margin):
            return None, None

        def fn(x):
            return repbox_loss(array_to_boxes(x), assigned, cfg, epsilon)

        if repbox_loss(preds, assigned, cfg, epsilon).value == 0.0:
            return None, None
        return fn, np.array([p.as_tuple() for p in preds])

    return make


def run_suite(
    n_points: int = 100,
    seed: int = 0,
    step: float = 1e-4,
    tol: float = 1e-4,
    nwd_cfg: NwdConfig = NwdConfig(),
    sigma_repgt: float = 0.5,
    sigma_repbox: float = 0.0,
    epsilon: float = DEFAULT_EPSILON,
) -> list[SuiteResult]:
    """Gradient checks for every loss kernel on ``n_points`` random smooth points each."""
    margin = 10 * step
    results = []
    for a_iou, a_nwd in DEFAULT_MIXES:
        rng = np.random.default_rng([seed, int(a_iou * 10)])
        make = regression_point_factory(RegMixConfig(a_iou, a_nwd), nwd_cfg, margin)
        results.append(_run_points(f"regression[{a_iou:g}/{a_nwd:g}]", make, n_points, rng, step, tol))
    rng = np.random.default_rng([seed, 101])
    results.append(_run_points("repgt", repgt_point_factory(SmoothLnConfig(sigma_repgt), margin),
                               n_points, rng, step, tol))
    rng = np.random.default_rng([seed, 102])
    results.append(_run_points("repbox", repbox_point_factory(SmoothLnConfig(sigma_repbox), epsilon, margin),
                               n_points, rng, step, tol))
    return results
