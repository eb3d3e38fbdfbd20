"""PCV: a minimal binary container for point cloud videos.

Layout (all little-endian):

    magic   4 bytes  b"PCVD"
    version u16      currently 1
    frames  u32      frame count T
    ppf     u32      points per frame, or 0 for variable (then T u32 counts)
    payload float32  xyz triples, frame-major

Files carry float32 (sensor precision); the in-memory video is float64.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .errors import BadMagicError, FormatError, TruncatedPayloadError, UnsupportedVersionError
from .types import Frame, PointCloudVideo

MAGIC = b"PCVD"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def video_to_pcv_bytes(video: PointCloudVideo) -> bytes:
    """Serialize a video; uniform per-frame counts use the fixed-count header."""
    counts = [len(f) for f in video.frames]
    uniform = len(set(counts)) == 1
    buf = io.BytesIO()
    buf.write(_HEADER.pack(MAGIC, VERSION, len(counts), counts[0] if uniform else 0))
    if not uniform:
        buf.write(struct.pack(f"<{len(counts)}I", *counts))
    for frame in video.frames:
        buf.write(np.ascontiguousarray(frame.points, dtype="<f4").tobytes())
    return buf.getvalue()


def video_from_pcv_bytes(data: bytes) -> PointCloudVideo:
    """Parse PCV bytes; timestamps are the implied frame indices 0..T-1."""
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"truncated header: {len(data)} bytes")
    magic, version, frame_count, ppf = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}, expected {VERSION}")
    offset = _HEADER.size
    if ppf == 0:
        table = frame_count * 4
        if len(data) < offset + table:
            raise TruncatedPayloadError("truncated per-frame count table")
        counts = list(struct.unpack_from(f"<{frame_count}I", data, offset))
        offset += table
    else:
        counts = [ppf] * frame_count
    expected = sum(counts) * 12
    if len(data) - offset < expected:
        raise TruncatedPayloadError(
            f"truncated payload: have {len(data) - offset} bytes, expected {expected}"
        )
    if len(data) - offset > expected:
        raise FormatError(f"oversized payload: {len(data) - offset - expected} trailing bytes")
    frames = []
    for count in counts:
        pts = np.frombuffer(data, dtype="<f4", count=count * 3, offset=offset).reshape(count, 3)
        frames.append(Frame(pts.astype(np.float64)))
        offset += count * 12
    return PointCloudVideo(tuple(frames))


def write_pcv(video: PointCloudVideo, path) -> None:
    Path(path).write_bytes(video_to_pcv_bytes(video))


def read_pcv(path) -> PointCloudVideo:
    return video_from_pcv_bytes(Path(path).read_bytes())
