"""Oracle-equivalence and finite-difference suites behind `verify`/`gradcheck`.

These are the runtime counterparts of the test suite: seeded random instances
checked against the brute-force oracles and against central finite
differences, with machine-readable reports.
"""

from __future__ import annotations

import numpy as np

from . import rng
from .geometry import farthest_point_sample, section_codebook
from .losses import chamfer_frame, motion_loss, smooth_l1, smooth_l1_deriv
from .motion import compute_motion_target
from .oracle import naive_cd, naive_chamfer, naive_fps
from .types import Frame, KeyPoint, PointTube


def finite_difference(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, elementwise in x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    for i in range(x.size):
        xp = x.copy().reshape(-1)
        xm = x.copy().reshape(-1)
        xp[i] += h
        xm[i] -= h
        flat[i] = (f(xp.reshape(x.shape)) - f(xm.reshape(x.shape))) / (2.0 * h)
    return grad


def _rel_error(analytic: np.ndarray, fd: np.ndarray) -> float:
    scale = max(1.0, float(np.abs(fd).max()))
    return float(np.abs(analytic - fd).max() / scale)


def chamfer_tie_gap(pred: np.ndarray, gt: np.ndarray) -> float:
    """Smallest margin by which any nearest-neighbor argmin is decided.

    Perturbing points by less than half this gap cannot change any argmin, so
    instances with a healthy gap are safely differentiable.
    """
    diff = pred[:, None, :] - gt[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    gap = np.inf
    if d2.shape[1] > 1:
        part = np.partition(d2, 1, axis=1)
        gap = min(gap, float((part[:, 1] - part[:, 0]).min()))
    if d2.shape[0] > 1:
        part = np.partition(d2, 1, axis=0)
        gap = min(gap, float((part[1, :] - part[0, :]).min()))
    return gap


def run_gradcheck(trials: int = 200, seed: int = 0, h: float = 1e-5, tol: float = 1e-4) -> dict:
    """Check analytic Chamfer and smooth-L1 gradients against central FD.

    Tie-adjacent Chamfer instances (argmin gap <= 1e-3) and smooth-L1 entries
    within 1e-3 of the |x| = 1 branch point are resampled: gradients are not
    defined there.
    """
    gen = rng.stream(seed, rng.CHECK, 1)
    max_chamfer = 0.0
    for _ in range(trials):
        while True:
            pred = gen.uniform(-1.0, 1.0, size=(8, 3))
            gt = gen.uniform(-1.0, 1.0, size=(8, 3))
            if chamfer_tie_gap(pred, gt) > 1e-3:
                break
        analytic = chamfer_frame(pred, gt)[1]
        fd = finite_difference(lambda x: chamfer_frame(x, gt)[0], pred, h)
        max_chamfer = max(max_chamfer, _rel_error(analytic, fd))

    max_smooth = 0.0
    for _ in range(trials):
        while True:
            gt_cd = gen.uniform(-2.0, 2.0, size=(2, 8))
            pred_cd = gt_cd + gen.uniform(-2.0, 2.0, size=(2, 8))
            if np.abs(np.abs(pred_cd - gt_cd) - 1.0).min() > 1e-3:
                break
        analytic = motion_loss(pred_cd, gt_cd)[1]
        fd = finite_difference(lambda x: motion_loss(x, gt_cd)[0], pred_cd, h)
        max_smooth = max(max_smooth, _rel_error(analytic, fd))

    below = np.nextafter(1.0, 0.0)
    value_gap = abs(float(smooth_l1(np.array(1.0))) - float(smooth_l1(np.array(below))))
    deriv_gap = abs(float(smooth_l1_deriv(np.array(1.0))) - float(smooth_l1_deriv(np.array(below))))
    ok = max_chamfer < tol and max_smooth < tol and value_gap <= 1e-12 and deriv_gap <= 1e-12
    return {
        "ok": bool(ok),
        "trials": trials,
        "step": h,
        "tolerance": tol,
        "chamfer_max_rel_error": max_chamfer,
        "smooth_l1_max_rel_error": max_smooth,
        "continuity_value_gap": value_gap,
        "continuity_deriv_gap": deriv_gap,
    }


def _random_tube(gen: np.random.Generator, l: int, n: int) -> PointTube:
    local = gen.uniform(-0.5, 0.5, size=(l, n, 3))
    return PointTube(
        key_point=KeyPoint(np.zeros(3), l // 2),
        local_points=local,
        source_indices=np.zeros((l, n), dtype=np.int64),
        radius=2.0,
    )


def run_oracle_suite(cases: int = 500, seed: int = 0) -> dict:
    """Compare FPS, Chamfer, and CD kernels against the naive oracles."""
    gen = rng.stream(seed, rng.CHECK, 2)

    fps_mismatches = 0
    for i in range(cases):
        p = int(gen.integers(2, 65))
        count = int(gen.integers(1, p + 1))
        frame = Frame(gen.uniform(-1.0, 1.0, size=(p, 3)))
        got = farthest_point_sample(frame, count, seed=int(gen.integers(1 << 31)))
        want = naive_fps(frame, count, first_index=int(got[0]))
        if set(got.tolist()) != set(want):
            fps_mismatches += 1

    chamfer_max = 0.0
    for _ in range(cases):
        m = int(gen.integers(1, 17))
        k = int(gen.integers(1, 17))
        pred = gen.uniform(-1.0, 1.0, size=(m, 3))
        gt = gen.uniform(-1.0, 1.0, size=(k, 3))
        chamfer_max = max(chamfer_max, abs(chamfer_frame(pred, gt)[0] - naive_chamfer(pred, gt)))

    cd_max = 0.0
    for _ in range(cases):
        n = int(gen.integers(4, 33))
        tube = _random_tube(gen, 3, n)
        sections = int(gen.choice([4, 8, 16]))
        interp = bool(gen.integers(2))
        stride = int(gen.integers(1, 3))
        codebook = section_codebook(sections)
        got = compute_motion_target(tube, codebook, interpolate=interp, stride=stride).cd
        want = naive_cd(tube, codebook, interpolate=interp, stride=stride)
        cd_max = max(cd_max, float(np.abs(got - want).max()))

    ok = fps_mismatches == 0 and chamfer_max <= 1e-12 and cd_max <= 1e-9
    return {
        "ok": bool(ok),
        "cases": cases,
        "fps_mismatches": fps_mismatches,
        "chamfer_max_abs_error": chamfer_max,
        "chamfer_tolerance": 1e-12,
        "cd_max_abs_error": cd_max,
        "cd_tolerance": 1e-9,
    }
