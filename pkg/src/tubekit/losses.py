"""Two-stream pretext losses with analytic gradients w.r.t. the predictions.

The appearance stream is a symmetric squared-distance Chamfer loss; the motion
stream is a smooth-L1 on temporal cardinality differences.  Gradients cover
the predictions only — nothing here backpropagates through a network.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, ShapeError
from .types import LossReport

RECON_MODES = ("decoupled", "coupled", "middle")


def chamfer_frame(pred: np.ndarray, gt: np.ndarray) -> tuple[float, np.ndarray]:
    """Symmetric Chamfer loss between two point sets, with d/d(pred).

    loss = mean_a min_b ||a-b||^2 + mean_b min_a ||b-a||^2.  Nearest-neighbor
    ties break to the lowest index, which fixes a deterministic subgradient.
    Returns (loss, gradient of shape (m, 3)).
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.ndim != 2 or pred.shape[1] != 3 or gt.ndim != 2 or gt.shape[1] != 3:
        raise ShapeError(f"point sets must be (m, 3) and (k, 3), got {pred.shape} and {gt.shape}")
    m, k = pred.shape[0], gt.shape[0]
    if m == 0 or k == 0:
        raise InputError("chamfer_frame requires non-empty point sets")
    diff = pred[:, None, :] - gt[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    nn_pred = np.argmin(d2, axis=1)  # first occurrence on ties
    nn_gt = np.argmin(d2, axis=0)
    rows = np.arange(m)
    cols = np.arange(k)
    loss = d2[rows, nn_pred].sum() / m + d2[nn_gt, cols].sum() / k
    grad = (2.0 / m) * (pred - gt[nn_pred])
    back = (2.0 / k) * (pred[nn_gt] - gt)
    np.add.at(grad, nn_gt, back)
    return float(loss), grad


def appearance_loss(pred: np.ndarray, gt: np.ndarray, recon_mode: str = "decoupled") -> tuple[float, np.ndarray]:
    """Reconstruction loss over an (l, n, 3) tube, mode-dependent.

    decoupled: per-frame Chamfer averaged over l frames.  coupled: one
    Chamfer over all l*n points pooled together.  middle: Chamfer on frame
    l//2 only (gradient is zero elsewhere).
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"pred/gt shape mismatch: {pred.shape} vs {gt.shape}")
    if pred.ndim != 3 or pred.shape[2] != 3:
        raise ShapeError(f"expected (l, n, 3) tubes, got {pred.shape}")
    if recon_mode not in RECON_MODES:
        raise InputError(f"recon_mode must be one of {RECON_MODES}, got {recon_mode!r}")
    l = pred.shape[0]
    grad = np.zeros_like(pred)
    if recon_mode == "coupled":
        loss, g = chamfer_frame(pred.reshape(-1, 3), gt.reshape(-1, 3))
        grad[:] = g.reshape(pred.shape)
        return loss, grad
    if recon_mode == "middle":
        mid = l // 2
        loss, g = chamfer_frame(pred[mid], gt[mid])
        grad[mid] = g
        return loss, grad
    total = 0.0
    for i in range(l):
        frame_loss, g = chamfer_frame(pred[i], gt[i])
        total += frame_loss
        grad[i] = g / l
    return total / l, grad


def smooth_l1(x: np.ndarray) -> np.ndarray:
    """Elementwise smooth-L1: 0.5 x^2 inside |x| < 1, |x| - 0.5 outside."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    return np.where(ax < 1.0, 0.5 * x * x, ax - 0.5)


def smooth_l1_deriv(x: np.ndarray) -> np.ndarray:
    """Elementwise derivative of smooth_l1: x inside |x| < 1, sign(x) outside."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(np.abs(x) < 1.0, x, np.sign(x))


def motion_loss(pred_cd: np.ndarray, gt_cd: np.ndarray) -> tuple[float, np.ndarray]:
    """Smooth-L1 motion loss over an (l-1, K) cardinality-difference matrix.

    Each row reduces by mean over its K sections, then rows average; the
    gradient is smooth_l1_deriv(diff) / (K * (l-1)).
    """
    pred_cd = np.asarray(pred_cd, dtype=np.float64)
    gt_cd = np.asarray(gt_cd, dtype=np.float64)
    if pred_cd.shape != gt_cd.shape:
        raise ShapeError(f"pred/gt shape mismatch: {pred_cd.shape} vs {gt_cd.shape}")
    if pred_cd.ndim != 2 or pred_cd.shape[0] < 1 or pred_cd.shape[1] < 1:
        raise ShapeError(f"expected a non-empty (rows, K) matrix, got {pred_cd.shape}")
    diff = pred_cd - gt_cd
    rows, k = diff.shape
    loss = smooth_l1(diff).mean(axis=1).mean()
    grad = smooth_l1_deriv(diff) / (k * rows)
    return float(loss), grad


def total_loss(app: tuple[float, np.ndarray], motion: tuple[float, np.ndarray],
               motion_weight: float = 1.0) -> LossReport:
    """Combine the two streams: an unweighted sum by default (weight 1).

    Gradients pass through unchanged.
    """
    app_loss, grad_app = app
    motion_loss_, grad_motion = motion
    if not (np.isfinite(app_loss) and np.isfinite(motion_loss_)):
        raise InputError("losses must be finite")
    return LossReport(
        app_loss=app_loss,
        motion_loss=motion_loss_,
        total_loss=app_loss + motion_weight * motion_loss_,
        grad_app=grad_app,
        grad_motion=grad_motion,
    )
