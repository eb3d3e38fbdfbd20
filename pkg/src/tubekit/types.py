"""Core domain types for point cloud videos and tube-based pretext targets.

All array payloads are float64 internally (file formats store float32) and are
frozen read-only at construction, so every type here is safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeError


def _frozen(arr: np.ndarray, dtype, shape_tail: tuple[int, ...] | None = None) -> np.ndarray:
    """Coerce to a C-contiguous read-only array of the given dtype."""
    out = np.ascontiguousarray(arr, dtype=dtype)
    if shape_tail is not None and out.shape[-len(shape_tail):] != shape_tail:
        raise ShapeError(f"expected trailing shape {shape_tail}, got {out.shape}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Frame:
    """One time step of a point cloud video: an unordered (P, 3) point set."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ShapeError(f"frame points must be (P, 3), got {pts.shape}")
        object.__setattr__(self, "points", _frozen(pts, np.float64))

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class PointCloudVideo:
    """An ordered sequence of frames with strictly increasing integer timestamps.

    Timestamps are frame indices (unitless ticks), not seconds: the temporal
    distance between two points is the difference of their frame indices.
    """

    frames: tuple[Frame, ...]
    frame_timestamps: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        frames = tuple(f if isinstance(f, Frame) else Frame(f) for f in self.frames)
        object.__setattr__(self, "frames", frames)
        ts = self.frame_timestamps
        if ts is None:
            ts = np.arange(len(frames), dtype=np.int64)
        ts = _frozen(np.asarray(ts), np.int64)
        if ts.ndim != 1 or ts.shape[0] != len(frames):
            raise ShapeError("frame_timestamps must be 1-D with one entry per frame")
        object.__setattr__(self, "frame_timestamps", ts)

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class KeyPoint:
    """A tube center: an exact member of one frame's point set."""

    position: np.ndarray
    frame_index: int

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen(np.asarray(self.position, dtype=np.float64), np.float64, (3,)))
        object.__setattr__(self, "frame_index", int(self.frame_index))


@dataclass(frozen=True)
class PointTube:
    """l frames x n points of tube-local offsets around one key point.

    ``local_points[t, j]`` is ``frame_point - key_point.position`` for the
    j-th sampled point of the t-th covered frame; covered frames are
    consecutive and centered on ``key_point.frame_index``.  ``radius`` is the
    query radius used at construction; offsets stay below it in norm except
    when a window frame had no in-radius point at all (nearest-point
    fallback).
    """

    key_point: KeyPoint
    local_points: np.ndarray   # (l, n, 3) float64
    source_indices: np.ndarray  # (l, n) int64, indices into source frames
    radius: float

    def __post_init__(self):
        pts = np.asarray(self.local_points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[2] != 3:
            raise ShapeError(f"local_points must be (l, n, 3), got {pts.shape}")
        idx = np.asarray(self.source_indices, dtype=np.int64)
        if idx.shape != pts.shape[:2]:
            raise ShapeError("source_indices must match local_points frames x points")
        object.__setattr__(self, "local_points", _frozen(pts, np.float64))
        object.__setattr__(self, "source_indices", _frozen(idx, np.int64))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def l(self) -> int:
        return self.local_points.shape[0]

    @property
    def n(self) -> int:
        return self.local_points.shape[1]


@dataclass(frozen=True)
class TubeSetWithMask:
    """All tubes of one video plus the visible/masked partition."""

    tubes: tuple[PointTube, ...]
    masked_flags: np.ndarray  # (N,) bool
    mask_ratio: float
    rng_seed: int

    def __post_init__(self):
        object.__setattr__(self, "tubes", tuple(self.tubes))
        flags = _frozen(np.asarray(self.masked_flags), np.bool_)
        if flags.shape != (len(self.tubes),):
            raise ShapeError("masked_flags must have one entry per tube")
        object.__setattr__(self, "masked_flags", flags)
        object.__setattr__(self, "mask_ratio", float(self.mask_ratio))
        object.__setattr__(self, "rng_seed", int(self.rng_seed))

    @property
    def num_tubes(self) -> int:
        return len(self.tubes)

    @property
    def num_masked(self) -> int:
        return int(self.masked_flags.sum())

    def masked_indices(self) -> np.ndarray:
        return np.nonzero(self.masked_flags)[0]


@dataclass(frozen=True)
class DirectionCodebook:
    """K unit directions partitioning the support sphere into sections."""

    centers: np.ndarray  # (K, 3) float64, unit norm

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 2:
            raise ShapeError(f"codebook centers must be (K>=2, 3), got {c.shape}")
        norms = np.linalg.norm(c, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ShapeError("codebook centers must have unit norm (tolerance 1e-12)")
        for i in range(c.shape[0]):
            for j in range(i + 1, c.shape[0]):
                if np.array_equal(c[i], c[j]):
                    raise ShapeError("codebook centers must be pairwise distinct")
        object.__setattr__(self, "centers", _frozen(c, np.float64))

    @property
    def k(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class CardinalityHistogram:
    """Per-section expected point counts for one tube frame."""

    bins: np.ndarray  # (K,) float64, non-negative

    def __post_init__(self):
        object.__setattr__(self, "bins", _frozen(np.asarray(self.bins, dtype=np.float64), np.float64))

    @property
    def k(self) -> int:
        return self.bins.shape[0]

    @property
    def total(self) -> float:
        return float(self.bins.sum())


@dataclass(frozen=True)
class MotionTarget:
    """Temporal cardinality difference matrix of one tube.

    Row t holds ``histogram(frame t + stride) - histogram(frame t)``; with
    stride 1 that is (l-1) x K.  Rows sum to zero whenever per-frame point
    counts are equal.
    """

    cd: np.ndarray  # (rows, K) float64
    temporal_stride: int = 1

    def __post_init__(self):
        cd = np.asarray(self.cd, dtype=np.float64)
        if cd.ndim != 2:
            raise ShapeError(f"cd must be 2-D, got shape {cd.shape}")
        object.__setattr__(self, "cd", _frozen(cd, np.float64))
        object.__setattr__(self, "temporal_stride", int(self.temporal_stride))


@dataclass(frozen=True)
class LossReport:
    """Scalar losses plus analytic gradients w.r.t. the predictions."""

    app_loss: float
    motion_loss: float
    total_loss: float
    grad_app: np.ndarray
    grad_motion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "app_loss", float(self.app_loss))
        object.__setattr__(self, "motion_loss", float(self.motion_loss))
        object.__setattr__(self, "total_loss", float(self.total_loss))
        object.__setattr__(self, "grad_app", _frozen(np.asarray(self.grad_app, dtype=np.float64), np.float64))
        object.__setattr__(self, "grad_motion", _frozen(np.asarray(self.grad_motion, dtype=np.float64), np.float64))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_video: empty violations means valid."""

    violations: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "violations", tuple(self.violations))

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_video(video: PointCloudVideo) -> ValidationReport:
    """Check PointCloudVideo invariants, returning all violations found."""
    violations: list[str] = []
    if video.num_frames < 1:
        violations.append("video has no frames")
    for i, frame in enumerate(video.frames):
        if len(frame) < 1:
            violations.append(f"frame {i} has no points")
        elif not np.isfinite(frame.points).all():
            violations.append(f"non-finite coordinate in frame {i}")
    ts = video.frame_timestamps
    if len(ts) > 1 and not np.all(np.diff(ts) > 0):
        violations.append("non-increasing timestamps")
    return ValidationReport(tuple(violations))


def video_from_arrays(frames: Iterable[np.ndarray], timestamps: Sequence[int] | None = None) -> PointCloudVideo:
    """Convenience constructor from raw (P, 3) arrays."""
    return PointCloudVideo(tuple(Frame(f) for f in frames), None if timestamps is None else np.asarray(timestamps))
