"""Deterministic geometric kernels: FPS, ball query, and direction binning.

All randomness flows through explicit seeds (see :mod:`tubekit.rng`); every
function here is pure and trivially parallel across frames and points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import InputError, RangeError
from .types import DirectionCodebook, Frame

_SQRT3 = np.sqrt(3.0)
_SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Direction codebooks


def octant_codebook() -> DirectionCodebook:
    """The 8 octant center directions (+-1, +-1, +-1)/sqrt(3).

    Bin order is canonical: bin b has sign pattern given by the bits of b,
    ``b = (x<0)*1 + (y<0)*2 + (z<0)*4``, so bin 0 is the all-positive octant
    and the antipodal bin of b is ``b ^ 7``.
    """
    centers = np.empty((8, 3), dtype=np.float64)
    for b in range(8):
        sx = -1.0 if b & 1 else 1.0
        sy = -1.0 if b & 2 else 1.0
        sz = -1.0 if b & 4 else 1.0
        centers[b] = (sx / _SQRT3, sy / _SQRT3, sz / _SQRT3)
    return DirectionCodebook(centers)


def _rotate_z(centers: np.ndarray, degrees: float) -> np.ndarray:
    a = np.deg2rad(degrees)
    c, s = np.cos(a), np.sin(a)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    out = centers @ rot.T
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def section_codebook(sections: int) -> DirectionCodebook:
    """Codebook for a given section count.

    8 is the octant codebook.  4 uses the xy-plane quadrant bisectors
    (+-1, +-1, 0)/sqrt(2) in the same sign-bit order.  16 splits each octant
    center into two by a +-22.5 degree azimuthal rotation about z (bins 2b and
    2b+1 are the -22.5 and +22.5 children of octant b).
    """
    if sections == 8:
        return octant_codebook()
    if sections == 4:
        centers = np.empty((4, 3), dtype=np.float64)
        for b in range(4):
            sx = -1.0 if b & 1 else 1.0
            sy = -1.0 if b & 2 else 1.0
            centers[b] = (sx / _SQRT2, sy / _SQRT2, 0.0)
        return DirectionCodebook(centers)
    if sections == 16:
        oct8 = octant_codebook().centers
        neg = _rotate_z(oct8, -22.5)
        pos = _rotate_z(oct8, 22.5)
        centers = np.empty((16, 3), dtype=np.float64)
        centers[0::2] = neg
        centers[1::2] = pos
        return DirectionCodebook(centers)
    raise RangeError(f"unsupported section count {sections}; use 4, 8, 16, or a custom codebook")


# ---------------------------------------------------------------------------
# Sampling kernels


def _points_of(frame) -> np.ndarray:
    pts = frame.points if isinstance(frame, Frame) else np.asarray(frame, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InputError(f"expected an (P, 3) point array, got shape {pts.shape}")
    return pts


def farthest_point_sample(frame, count: int, seed: int) -> np.ndarray:
    """Greedy farthest point sampling over one frame.

    The first index is drawn uniformly from the seeded stream; each subsequent
    pick maximizes the minimum squared distance to the already-selected set,
    breaking ties by lowest index.  Returns ``count`` distinct indices in
    selection order.
    """
    pts = _points_of(frame)
    p = pts.shape[0]
    if not 1 <= count <= p:
        raise RangeError(f"count must be in [1, {p}], got {count}")
    first = int(rng.stream(seed, rng.FPS).integers(p))
    return _fps_from(pts, count, first)


def _fps_from(pts: np.ndarray, count: int, first: int) -> np.ndarray:
    selected = np.empty(count, dtype=np.int64)
    selected[0] = first
    min_d2 = ((pts - pts[first]) ** 2).sum(axis=1)
    for i in range(1, count):
        nxt = int(np.argmax(min_d2))  # argmax takes the lowest index on ties
        selected[i] = nxt
        np.minimum(min_d2, ((pts - pts[nxt]) ** 2).sum(axis=1), out=min_d2)
    return selected


def ball_query(frame, center, radius: float, n: int, seed: int) -> np.ndarray:
    """Sample ``n`` point indices within ``radius`` of ``center``.

    Points strictly inside the radius are the candidate set: with at least n
    hits a uniform subset is drawn without replacement, with fewer hits the
    draw is with replacement, and with no hits at all the globally nearest
    point's index is repeated n times.  Output indices are sorted so a tube
    frame's point order is a canonical function of the chosen multiset.
    """
    pts = _points_of(frame)
    if pts.shape[0] == 0:
        raise InputError("ball_query requires a non-empty frame")
    if radius <= 0:
        raise RangeError(f"radius must be positive, got {radius}")
    if n < 1:
        raise RangeError(f"n must be >= 1, got {n}")
    center = np.asarray(center, dtype=np.float64).reshape(3)
    d2 = ((pts - center) ** 2).sum(axis=1)
    hits = np.nonzero(d2 < radius * radius)[0]
    if hits.size == 0:
        return np.full(n, int(np.argmin(d2)), dtype=np.int64)
    gen = rng.stream(seed, rng.BALL)
    if hits.size >= n:
        chosen = gen.choice(hits.size, size=n, replace=False)
    else:
        chosen = gen.integers(0, hits.size, size=n)
    return np.sort(hits[chosen]).astype(np.int64)


# ---------------------------------------------------------------------------
# Direction-bin assignment


@dataclass(frozen=True)
class BinAssignment:
    """Soft assignment of one offset to its nearest two direction bins.

    ``primary_weight + secondary_weight == 1`` exactly; the primary weight is
    at least 0.5, with equality when the offset is equidistant from both
    centers.  ``uniform`` marks the degenerate zero-offset case, whose mass is
    spread 1/K over every bin by histogram accumulation.
    """

    primary_bin: int
    secondary_bin: int
    primary_weight: float
    secondary_weight: float
    uniform: bool = False


def bin_assignments(
    offsets: np.ndarray, codebook: DirectionCodebook, interpolate: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized assignment of (m, 3) offsets to direction bins.

    Returns ``(primary_bin, secondary_bin, primary_weight, secondary_weight,
    uniform_mask)``.  The angular distances d1, d2 to the nearest and
    second-nearest centers give ``secondary_weight = d1 / (d1 + d2)`` when
    interpolating; nearest-center ties resolve to the lowest bin index.
    Weights for rows under ``uniform_mask`` (zero offsets) are placeholders.
    """
    offs = np.asarray(offsets, dtype=np.float64)
    if offs.ndim != 2 or offs.shape[1] != 3:
        raise InputError(f"offsets must be (m, 3), got {offs.shape}")
    norms = np.linalg.norm(offs, axis=1)
    uniform = norms == 0.0
    safe = np.where(uniform, 1.0, norms)
    unit = offs / safe[:, None]
    # explicit product-sum, not BLAS matmul: the reduction order (and hence
    # every bit of the result) stays independent of the batch size
    dots = (unit[:, None, :] * codebook.centers[None, :, :]).sum(axis=2)
    angles = np.arccos(np.clip(dots, -1.0, 1.0))
    order = np.argsort(angles, axis=1, kind="stable")
    m = offs.shape[0]
    rows = np.arange(m)
    primary = order[:, 0]
    secondary = order[:, 1]
    d1 = angles[rows, primary]
    d2 = angles[rows, secondary]
    if interpolate:
        sw = d1 / (d1 + d2)
        pw = 1.0 - sw
    else:
        pw = np.ones(m, dtype=np.float64)
        sw = np.zeros(m, dtype=np.float64)
    pw = np.where(uniform, 0.5, pw)
    sw = np.where(uniform, 0.5, sw)
    return primary.astype(np.int64), secondary.astype(np.int64), pw, sw, uniform


def assign_direction(offset, codebook: DirectionCodebook, interpolate: bool = True) -> BinAssignment:
    """Assign a single 3-vector offset to its direction bins."""
    off = np.asarray(offset, dtype=np.float64).reshape(1, 3)
    primary, secondary, pw, sw, uniform = bin_assignments(off, codebook, interpolate)
    if uniform[0]:
        return BinAssignment(0, 0, 0.5, 0.5, uniform=True)
    return BinAssignment(int(primary[0]), int(secondary[0]), float(pw[0]), float(sw[0]))
