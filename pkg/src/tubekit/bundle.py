"""Target bundles: the on-disk product of the pretext pipeline.

A bundle holds, per masked tube, the reconstruction target and the cardinality
difference matrix (both float32 on disk), plus enough file-level context — a
canonical config echo, the seed, and the direction codebook — that recomputing
from the source video reproduces the bundle bit-exactly.

Layout (little-endian):

    magic    4 bytes  b"TBND"
    version  u16      currently 1
    seed     u64
    cfg_len  u32      followed by the UTF-8 canonical config text
    K        u32      followed by K x 3 float64 codebook centers
    tubes    u32      total tube count of the source division
    count    u32      number of masked-tube records that follow
    record:  tube_index u32 | key frame u32 | key xyz f32 x3
             | recon: u8 ndim, u32 dims..., f32 data
             | cd:    u8 ndim, u32 dims..., f32 data
"""

from __future__ import annotations

import dataclasses
import io
import struct
from pathlib import Path

import numpy as np

from .errors import BadMagicError, FormatError, TruncatedPayloadError, UnsupportedVersionError
from .pipeline import PipelineConfig, assemble_targets, divide, mask
from .types import DirectionCodebook, PointCloudVideo

MAGIC = b"TBND"
VERSION = 1


# ---------------------------------------------------------------------------
# Canonical config text

_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip form
    return str(value)


def canonical_config_text(config: PipelineConfig) -> str:
    """Sorted key=value lines with fixed formatting, so byte equality of two
    echoes implies config equality."""
    items = dataclasses.asdict(config)
    return "".join(f"{k}={_format_value(items[k])}\n" for k in sorted(items))


def parse_config_text(text: str) -> PipelineConfig:
    """Parse a canonical config echo; unknown keys are ignored, missing keys
    fall back to defaults."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno} is not key=value: {line!r}")
        key, raw = line.split("=", 1)
        if key not in _CONFIG_FIELDS:
            continue
        default = getattr(PipelineConfig, key)
        if isinstance(default, bool):
            if raw not in ("true", "false"):
                raise FormatError(f"config key {key} expects true/false, got {raw!r}")
            values[key] = raw == "true"
        elif isinstance(default, int):
            values[key] = int(raw)
        elif isinstance(default, float):
            values[key] = float(raw)
        else:
            values[key] = raw
    return PipelineConfig(**values)


# ---------------------------------------------------------------------------
# Bundle model


@dataclasses.dataclass(frozen=True)
class TubeTargetRecord:
    tube_index: int
    key_frame: int
    key_position: np.ndarray  # (3,) float32
    recon: np.ndarray         # (l', n, 3) float32
    cd: np.ndarray            # (rows, K) float32

    def __post_init__(self):
        object.__setattr__(self, "key_position", np.asarray(self.key_position, dtype=np.float32).reshape(3))
        object.__setattr__(self, "recon", np.asarray(self.recon, dtype=np.float32))
        object.__setattr__(self, "cd", np.asarray(self.cd, dtype=np.float32))


@dataclasses.dataclass(frozen=True)
class TargetBundle:
    config: PipelineConfig
    codebook: DirectionCodebook
    seed: int
    records: tuple[TubeTargetRecord, ...]
    num_tubes: int


def build_targets_bundle(
    video: PointCloudVideo,
    config: PipelineConfig,
    codebook: DirectionCodebook | None = None,
) -> TargetBundle:
    """Run divide + mask + assemble and package the masked-tube targets."""
    if codebook is None:
        codebook = config.codebook()
    elif codebook.k != config.sections:
        config = config.with_overrides(sections=codebook.k)
    tubes = divide(video, config)
    tube_set = mask(tubes, config.mask_ratio, config.seed)
    recon, cds = assemble_targets(tube_set, config, codebook)
    records = []
    for j, idx in enumerate(tube_set.masked_indices()):
        tube = tube_set.tubes[idx]
        cd = cds[j].cd if config.motion_stream else np.zeros((0, codebook.k))
        records.append(
            TubeTargetRecord(
                tube_index=int(idx),
                key_frame=tube.key_point.frame_index,
                key_position=tube.key_point.position.astype(np.float32),
                recon=recon[j].astype(np.float32),
                cd=np.asarray(cd, dtype=np.float32),
            )
        )
    return TargetBundle(config, codebook, config.seed, tuple(records), len(tubes))


# ---------------------------------------------------------------------------
# Serialization

def _pack_array(buf: io.BytesIO, arr: np.ndarray) -> None:
    buf.write(struct.pack("<B", arr.ndim))
    buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    buf.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def bundle_to_bytes(bundle: TargetBundle) -> bytes:
    cfg = canonical_config_text(bundle.config).encode("utf-8")
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", VERSION))
    buf.write(struct.pack("<Q", bundle.seed & 0xFFFFFFFFFFFFFFFF))
    buf.write(struct.pack("<I", len(cfg)))
    buf.write(cfg)
    centers = bundle.codebook.centers
    buf.write(struct.pack("<I", centers.shape[0]))
    buf.write(np.ascontiguousarray(centers, dtype="<f8").tobytes())
    buf.write(struct.pack("<I", bundle.num_tubes))
    buf.write(struct.pack("<I", len(bundle.records)))
    for rec in bundle.records:
        buf.write(struct.pack("<II", rec.tube_index, rec.key_frame))
        buf.write(np.ascontiguousarray(rec.key_position, dtype="<f4").tobytes())
        _pack_array(buf, rec.recon)
        _pack_array(buf, rec.cd)
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise TruncatedPayloadError(f"truncated bundle: {what}")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size, what))

    def array_f4(self, count: int, what: str) -> np.ndarray:
        raw = self.take(count * 4, what)
        return np.frombuffer(raw, dtype="<f4").copy()

    def array_f8(self, count: int, what: str) -> np.ndarray:
        raw = self.take(count * 8, what)
        return np.frombuffer(raw, dtype="<f8").copy()


def _unpack_array(r: _Reader, what: str) -> np.ndarray:
    (ndim,) = r.unpack("<B", f"{what} ndim")
    dims = r.unpack(f"<{ndim}I", f"{what} dims") if ndim else ()
    total = int(np.prod(dims)) if ndim else 1
    if ndim and min(dims) == 0:
        total = 0
    return r.array_f4(total, f"{what} data").reshape(dims)


def bundle_from_bytes(data: bytes) -> TargetBundle:
    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = r.unpack("<H", "version")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported bundle version {version}")
    (seed,) = r.unpack("<Q", "seed")
    (cfg_len,) = r.unpack("<I", "config length")
    config = parse_config_text(r.take(cfg_len, "config text").decode("utf-8"))
    (k,) = r.unpack("<I", "codebook size")
    centers = r.array_f8(k * 3, "codebook centers").reshape(k, 3)
    codebook = DirectionCodebook(centers)
    (num_tubes,) = r.unpack("<I", "tube count")
    (num_records,) = r.unpack("<I", "record count")
    records = []
    for i in range(num_records):
        tube_index, key_frame = r.unpack("<II", f"record {i} header")
        key_position = r.array_f4(3, f"record {i} key point")
        recon = _unpack_array(r, f"record {i} recon")
        cd = _unpack_array(r, f"record {i} cd")
        records.append(TubeTargetRecord(tube_index, key_frame, key_position, recon, cd))
    if r.offset != len(data):
        raise FormatError(f"oversized bundle: {len(data) - r.offset} trailing bytes")
    return TargetBundle(config, codebook, seed, tuple(records), num_tubes)


def write_bundle(bundle: TargetBundle, path) -> None:
    Path(path).write_bytes(bundle_to_bytes(bundle))


def read_bundle(path) -> TargetBundle:
    return bundle_from_bytes(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# Summaries (Fig-style cardinality-flow tables)


def summarize_bundle(bundle: TargetBundle, per_tube: bool = False) -> dict:
    """Aggregate CD statistics: per-(row, bin) sums over tubes plus bin totals."""
    k = bundle.codebook.k
    rows = max((rec.cd.shape[0] for rec in bundle.records), default=0)
    row_sums = np.zeros((rows, k), dtype=np.float64)
    for rec in bundle.records:
        row_sums[: rec.cd.shape[0]] += rec.cd.astype(np.float64)
    out = {
        "num_tubes": bundle.num_tubes,
        "num_masked": len(bundle.records),
        "sections": k,
        "cd_rows": rows,
        "bin_row_sums": row_sums.tolist(),
        "bin_totals": row_sums.sum(axis=0).tolist(),
        "max_abs_cd": float(max((np.abs(rec.cd).max() for rec in bundle.records if rec.cd.size), default=0.0)),
    }
    if per_tube:
        out["tubes"] = [
            {
                "tube_index": rec.tube_index,
                "key_frame": rec.key_frame,
                "cd": rec.cd.astype(np.float64).tolist(),
            }
            for rec in bundle.records
        ]
    return out
