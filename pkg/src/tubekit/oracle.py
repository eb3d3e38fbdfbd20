"""Brute-force reference implementations, used only by tests and `verify`.

Everything here is written as literal scalar loops sharing no code with the
production kernels; speed is a non-goal (unusable above ~1e4 points).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError, RangeError
from .types import DirectionCodebook, PointTube


def _as_point_list(frame) -> list[tuple[float, float, float]]:
    pts = frame.points if hasattr(frame, "points") else np.asarray(frame, dtype=float)
    return [(float(p[0]), float(p[1]), float(p[2])) for p in pts]


def naive_fps(frame, count: int, first_index: int) -> list[int]:
    """O(N^2) farthest point sampling with a forced first pick.

    Taking the first index explicitly (instead of a seed) lets equivalence
    tests isolate the selection logic from RNG plumbing.  Ties break to the
    lowest index, as in the production kernel.
    """
    pts = _as_point_list(frame)
    p = len(pts)
    if not 1 <= count <= p:
        raise RangeError(f"count must be in [1, {p}], got {count}")
    if not 0 <= first_index < p:
        raise RangeError(f"first_index must be in [0, {p}), got {first_index}")

    def d2(a, b):
        dx = a[0] - b[0]
        dy = a[1] - b[1]
        dz = a[2] - b[2]
        return dx * dx + dy * dy + dz * dz

    selected = [first_index]
    while len(selected) < count:
        best_idx = -1
        best_dist = -1.0
        for i in range(p):
            nearest = min(d2(pts[i], pts[j]) for j in selected)
            if nearest > best_dist:
                best_dist = nearest
                best_idx = i
        selected.append(best_idx)
    return selected


def naive_chamfer(pred, gt) -> float:
    """Full O(mk) double-loop Chamfer loss, no spatial acceleration."""
    a_pts = _as_point_list(np.asarray(pred, dtype=float))
    b_pts = _as_point_list(np.asarray(gt, dtype=float))
    if not a_pts or not b_pts:
        raise InputError("naive_chamfer requires non-empty point sets")

    def d2(a, b):
        dx = a[0] - b[0]
        dy = a[1] - b[1]
        dz = a[2] - b[2]
        return dx * dx + dy * dy + dz * dz

    fwd = 0.0
    for a in a_pts:
        fwd += min(d2(a, b) for b in b_pts)
    bwd = 0.0
    for b in b_pts:
        bwd += min(d2(b, a) for a in a_pts)
    return fwd / len(a_pts) + bwd / len(b_pts)


def _naive_histogram(offsets, centers, interpolate: bool, k: int) -> list[float]:
    bins = [0.0] * k
    for off in offsets:
        ox, oy, oz = float(off[0]), float(off[1]), float(off[2])
        norm = math.sqrt(ox * ox + oy * oy + oz * oz)
        if norm == 0.0:
            for b in range(k):
                bins[b] += 1.0 / k
            continue
        ux, uy, uz = ox / norm, oy / norm, oz / norm
        best = second = -1
        best_ang = second_ang = float("inf")
        for j in range(k):
            dot = ux * centers[j][0] + uy * centers[j][1] + uz * centers[j][2]
            dot = max(-1.0, min(1.0, dot))
            ang = math.acos(dot)
            if ang < best_ang:
                second, second_ang = best, best_ang
                best, best_ang = j, ang
            elif ang < second_ang:
                second, second_ang = j, ang
        if interpolate:
            sw = best_ang / (best_ang + second_ang)
            bins[best] += 1.0 - sw
            bins[second] += sw
        else:
            bins[best] += 1.0
    return bins


def naive_cd(tube: PointTube, codebook: DirectionCodebook, interpolate: bool = True, stride: int = 1) -> np.ndarray:
    """Per-point-loop temporal cardinality difference for one tube."""
    l = tube.l
    if not 1 <= stride <= l - 1:
        raise RangeError(f"stride must be in [1, {l - 1}], got {stride}")
    centers = [(float(c[0]), float(c[1]), float(c[2])) for c in codebook.centers]
    k = len(centers)
    hists = [_naive_histogram(tube.local_points[t], centers, interpolate, k) for t in range(l)]
    rows = []
    for t in range(l - stride):
        rows.append([hists[t + stride][b] - hists[t][b] for b in range(k)])
    return np.asarray(rows, dtype=np.float64)
