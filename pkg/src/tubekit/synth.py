"""Seeded synthetic point cloud videos for demos, tests, and CD sanity checks.

Each video is a crude standing figure built from gaussian blobs (torso, head,
two arms, two legs).  Kinds:

    static     frame 0 repeated
    translate  whole body drifts along +x
    raise      arm blobs sweep upward over the clip
    lower      the exact framewise time reversal of `raise` (same seed)
    kick       one leg blob swings forward (+x) and up

Coordinates are quantized to float32 at generation, so a video round-trips
PCV files bit-exactly.
"""

from __future__ import annotations

import numpy as np

from . import rng
from .errors import InputError, RangeError
from .types import Frame, PointCloudVideo

KINDS = ("static", "translate", "raise", "lower", "kick")

# Blob centers/scales in meters, roughly MSR-scale bodies.
_PARTS = {
    "torso": ((0.0, 0.0, 0.95), (0.14, 0.09, 0.30), 0.40),
    "head": ((0.0, 0.0, 1.50), (0.08, 0.08, 0.09), 0.10),
    "arm_l": ((-0.26, 0.0, 0.80), (0.05, 0.05, 0.18), 0.125),
    "arm_r": ((0.26, 0.0, 0.80), (0.05, 0.05, 0.18), 0.125),
    "leg_l": ((-0.10, 0.0, 0.35), (0.05, 0.05, 0.22), 0.125),
    "leg_r": ((0.10, 0.0, 0.35), (0.05, 0.05, 0.22), 0.125),
}


def _base_body(points: int, gen: np.random.Generator) -> dict[str, np.ndarray]:
    names = list(_PARTS)
    counts = [int(points * _PARTS[p][2]) for p in names]
    counts[0] += points - sum(counts)  # absorb rounding into the torso
    blobs = {}
    for name, count in zip(names, counts):
        center, scale, _ = _PARTS[name]
        blobs[name] = np.asarray(center) + gen.normal(size=(count, 3)) * np.asarray(scale)
    return blobs


def _assemble(blobs: dict[str, np.ndarray], shifts: dict[str, np.ndarray]) -> np.ndarray:
    parts = [blobs[name] + shifts.get(name, 0.0) for name in _PARTS]
    pts = np.concatenate(parts, axis=0)
    # float32 quantization up front: what a sensor (and the PCV format) carries
    return pts.astype(np.float32).astype(np.float64)


def gen_synthetic(kind: str, frames: int, points: int, seed: int) -> PointCloudVideo:
    """Generate a seeded synthetic video of the given kind."""
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; choose from {KINDS}")
    if frames < 3:
        raise RangeError(f"frames must be >= 3, got {frames}")
    if points < 64:
        raise RangeError(f"points must be >= 64, got {points}")
    if kind == "lower":
        base = gen_synthetic("raise", frames, points, seed)
        return PointCloudVideo(tuple(reversed(base.frames)))
    gen = rng.stream(seed, rng.GEN)
    blobs = _base_body(points, gen)
    if kind == "static":
        frame = Frame(_assemble(blobs, {}))
        return PointCloudVideo(tuple(frame for _ in range(frames)))
    out = []
    for t in range(frames):
        progress = t / (frames - 1)
        shifts: dict[str, np.ndarray] = {}
        if kind == "translate":
            step = np.array([0.05 * t, 0.0, 0.0])
            shifts = {name: step for name in _PARTS}
        elif kind == "raise":
            lift = np.array([0.0, 0.0, 0.75 * progress])
            shifts = {"arm_l": lift, "arm_r": lift}
        elif kind == "kick":
            swing = np.array([0.55 * progress, 0.0, 0.25 * progress])
            shifts = {"leg_r": swing}
        out.append(Frame(_assemble(blobs, shifts)))
    return PointCloudVideo(tuple(out))
