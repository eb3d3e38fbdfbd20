"""Division of a video into point tubes, random tube masking, and assembly of
the aligned reconstruction / motion target tensors for the masked tubes.

Sampling-stream layout: the FPS stream is keyed by the pipeline seed alone and
the ball-query stream by (seed, key-point rank) — deliberately independent of
anchor position and window offset, so division commutes with frame reversal
and with any parallel execution order of anchors or tubes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import rng
from .errors import InputError, RangeError, ShapeError
from .geometry import ball_query, farthest_point_sample, section_codebook
from .motion import compute_motion_target
from .types import (
    DirectionCodebook,
    KeyPoint,
    MotionTarget,
    PointCloudVideo,
    PointTube,
    TubeSetWithMask,
)

RECON_MODES = ("decoupled", "coupled", "middle")


@dataclass(frozen=True)
class PipelineConfig:
    """All knobs of the pretext pipeline, with the published defaults.

    ``l``/``n`` are the tube frame count and neighbors per frame, ``radius``
    the spherical query radius; spatial/temporal downsampling control how many
    key points and anchor frames are taken.  Motion-stream knobs (sections,
    interpolate, stride, normalize_cd) and the reconstruction mode mirror the
    ablation switches.
    """

    l: int = 3
    n: int = 32
    radius: float = 0.3
    spatial_downsample: int = 32
    temporal_downsample: int = 2
    mask_ratio: float = 0.75
    recon_mode: str = "decoupled"
    seed: int = 0
    sections: int = 8
    interpolate: bool = True
    stride: int = 1
    normalize_cd: bool = False
    motion_stream: bool = True
    motion_weight: float = 1.0

    def __post_init__(self):
        if self.recon_mode not in RECON_MODES:
            raise InputError(f"recon_mode must be one of {RECON_MODES}, got {self.recon_mode!r}")
        min_l = 1 if (self.recon_mode == "middle" and not self.motion_stream) else 2
        if self.l < min_l:
            raise RangeError(f"l must be >= {min_l}, got {self.l}")
        if not 0.0 <= self.mask_ratio <= 1.0:
            raise RangeError(f"mask_ratio must be in [0, 1], got {self.mask_ratio}")
        if self.radius <= 0:
            raise RangeError(f"radius must be positive, got {self.radius}")
        if self.n < 1 or self.spatial_downsample < 1 or self.temporal_downsample < 1:
            raise RangeError("n and downsample rates must be >= 1")
        if self.motion_stream and self.l >= 2 and not 1 <= self.stride <= self.l - 1:
            raise RangeError(f"stride must be in [1, {self.l - 1}], got {self.stride}")

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        return replace(self, **kwargs)

    def codebook(self) -> DirectionCodebook:
        return section_codebook(self.sections)


def anchor_frames(num_frames: int, config: PipelineConfig) -> list[int]:
    """Anchor frame indices: every temporal_downsample-th frame whose full
    window fits inside the video."""
    half_lo = (config.l - 1) // 2
    half_hi = config.l // 2
    return list(range(half_lo, num_frames - half_hi, config.temporal_downsample))


def divide(video: PointCloudVideo, config: PipelineConfig) -> list[PointTube]:
    """Divide a video into point tubes.

    Per anchor frame, FPS picks ``max(1, P // spatial_downsample)`` key
    points; per key point and window frame, a seeded ball query samples n
    points whose offsets from the key point form the tube.  Tubes are ordered
    by (anchor, key-point rank).
    """
    if video.num_frames < config.l:
        raise InputError(f"video has {video.num_frames} frames; need at least l={config.l}")
    for i, frame in enumerate(video.frames):
        if len(frame) == 0:
            raise InputError(f"frame {i} has no points")
    half_lo = (config.l - 1) // 2
    half_hi = config.l // 2
    tubes: list[PointTube] = []
    for anchor in anchor_frames(video.num_frames, config):
        frame = video.frames[anchor]
        count = max(1, len(frame) // config.spatial_downsample)
        kp_indices = farthest_point_sample(frame, count, config.seed)
        window = range(anchor - half_lo, anchor + half_hi + 1)
        for rank, kp_idx in enumerate(kp_indices):
            kp_pos = frame.points[kp_idx]
            tube_seed = rng.fold(config.seed, rank)
            local = np.empty((config.l, config.n, 3), dtype=np.float64)
            source = np.empty((config.l, config.n), dtype=np.int64)
            for w, t in enumerate(window):
                idx = ball_query(video.frames[t], kp_pos, config.radius, config.n, tube_seed)
                source[w] = idx
                local[w] = video.frames[t].points[idx] - kp_pos
            tubes.append(
                PointTube(
                    key_point=KeyPoint(kp_pos, anchor),
                    local_points=local,
                    source_indices=source,
                    radius=config.radius,
                )
            )
    return tubes


def mask_count(num_tubes: int, mask_ratio: float) -> int:
    # Fraction gives the exact floor of the stored float ratio times N.
    return int(Fraction(mask_ratio) * num_tubes)


def mask_flags(num_tubes: int, mask_ratio: float, seed: int) -> np.ndarray:
    """Boolean flags with exactly floor(mask_ratio * N) tubes masked,
    chosen uniformly without replacement from the seeded stream."""
    if not 0.0 <= mask_ratio <= 1.0:
        raise RangeError(f"mask_ratio must be in [0, 1], got {mask_ratio}")
    if num_tubes < 0:
        raise RangeError(f"num_tubes must be >= 0, got {num_tubes}")
    m = mask_count(num_tubes, mask_ratio)
    flags = np.zeros(num_tubes, dtype=np.bool_)
    if m:
        chosen = rng.stream(seed, rng.MASK).choice(num_tubes, size=m, replace=False)
        flags[chosen] = True
    return flags


def mask(tubes, mask_ratio: float, seed: int) -> TubeSetWithMask:
    """Flag exactly floor(mask_ratio * N) tubes as masked, uniformly at random.

    Spacetime-agnostic: the choice ignores tube structure entirely.  The same
    (tubes, ratio, seed) always reproduces the same flags.
    """
    tubes = tuple(tubes)
    return TubeSetWithMask(tubes, mask_flags(len(tubes), mask_ratio, seed), mask_ratio, seed)


def assemble_targets(
    tube_set: TubeSetWithMask,
    config: PipelineConfig,
    codebook: DirectionCodebook | None = None,
) -> tuple[list[np.ndarray], list[MotionTarget]]:
    """Per-masked-tube ground truth, ordered by tube index.

    Reconstruction targets are the tube-local offsets — all l frames in
    decoupled/coupled mode, only frame l//2 in middle mode.  Motion targets
    come from compute_motion_target (empty when the motion stream is off).
    """
    if codebook is None:
        codebook = config.codebook()
    recon: list[np.ndarray] = []
    cds: list[MotionTarget] = []
    for i in tube_set.masked_indices():
        tube = tube_set.tubes[i]
        if config.recon_mode == "middle":
            recon.append(tube.local_points[tube.l // 2 : tube.l // 2 + 1])
        else:
            recon.append(tube.local_points)
        if config.motion_stream:
            cds.append(
                compute_motion_target(
                    tube, codebook, interpolate=config.interpolate,
                    stride=config.stride, normalize=config.normalize_cd,
                )
            )
    return recon, cds


@dataclass(frozen=True)
class EmbeddingMLP:
    """Two affine layers with an elementwise max(0, .) between, 3 -> H -> D.

    Parameters are fixed by ``init_seed`` at creation, so the embedding of a
    tube is reproducible.
    """

    w1: np.ndarray  # (3, H)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H, D)
    b2: np.ndarray  # (D,)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise InputError(f"non-finite values in {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.w1.shape[0] != 3 or self.w1.shape[1] != self.b1.shape[0] \
                or self.w2.shape[0] != self.b1.shape[0] or self.w2.shape[1] != self.b2.shape[0]:
            raise ShapeError("inconsistent MLP parameter shapes")

    @classmethod
    def create(cls, hidden: int = 64, out: int = 128, init_seed: int = 0) -> "EmbeddingMLP":
        gen = rng.stream(init_seed, rng.MLP)
        w1 = gen.normal(0.0, np.sqrt(2.0 / 3.0), size=(3, hidden))
        w2 = gen.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, out))
        return cls(w1, np.zeros(hidden), w2, np.zeros(out))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        h = np.maximum(x @ self.w1 + self.b1, 0.0)
        return h @ self.w2 + self.b2


def embed(tube: PointTube, mlp: EmbeddingMLP) -> np.ndarray:
    """Tube embedding: the sum of the MLP over all l x n local offsets."""
    flat = tube.local_points.reshape(-1, 3)
    return mlp(flat).sum(axis=0)
