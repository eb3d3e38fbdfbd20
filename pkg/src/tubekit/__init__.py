"""tubekit: point-tube pretext targets for point cloud videos.

A library, HTTP service, and CLI implementing point-tube division of point
cloud videos, random tube masking, cardinality-difference motion targets, and
the two-stream reconstruction/motion losses with analytic gradients.
"""

__version__ = "0.1.0"

from .errors import (
    BadMagicError,
    FormatError,
    InputError,
    RangeError,
    ShapeError,
    TruncatedPayloadError,
    TubekitError,
    UnsupportedVersionError,
)
from .types import (
    CardinalityHistogram,
    DirectionCodebook,
    Frame,
    KeyPoint,
    LossReport,
    MotionTarget,
    PointCloudVideo,
    PointTube,
    TubeSetWithMask,
    ValidationReport,
    validate_video,
    video_from_arrays,
)
from .geometry import (
    BinAssignment,
    assign_direction,
    ball_query,
    farthest_point_sample,
    octant_codebook,
    section_codebook,
)
from .motion import cardinality_histogram, compute_motion_target
from .pipeline import (
    EmbeddingMLP,
    PipelineConfig,
    anchor_frames,
    assemble_targets,
    divide,
    embed,
    mask,
    mask_flags,
)
from .losses import appearance_loss, chamfer_frame, motion_loss, smooth_l1, total_loss
from .pcv import read_pcv, video_from_pcv_bytes, video_to_pcv_bytes, write_pcv
from .bundle import (
    TargetBundle,
    TubeTargetRecord,
    build_targets_bundle,
    bundle_from_bytes,
    bundle_to_bytes,
    canonical_config_text,
    parse_config_text,
    read_bundle,
    summarize_bundle,
    write_bundle,
)
from .synth import gen_synthetic
from .verify import run_gradcheck, run_oracle_suite

__all__ = [
    "__version__",
    "BadMagicError", "FormatError", "InputError", "RangeError", "ShapeError",
    "TruncatedPayloadError", "TubekitError", "UnsupportedVersionError",
    "CardinalityHistogram", "DirectionCodebook", "Frame", "KeyPoint", "LossReport",
    "MotionTarget", "PointCloudVideo", "PointTube", "TubeSetWithMask",
    "ValidationReport", "validate_video", "video_from_arrays",
    "BinAssignment", "assign_direction", "ball_query", "farthest_point_sample",
    "octant_codebook", "section_codebook",
    "cardinality_histogram", "compute_motion_target",
    "EmbeddingMLP", "PipelineConfig", "anchor_frames", "assemble_targets",
    "divide", "embed", "mask", "mask_flags",
    "appearance_loss", "chamfer_frame", "motion_loss", "smooth_l1", "total_loss",
    "read_pcv", "video_from_pcv_bytes", "video_to_pcv_bytes", "write_pcv",
    "TargetBundle", "TubeTargetRecord", "build_targets_bundle", "bundle_from_bytes",
    "bundle_to_bytes", "canonical_config_text", "parse_config_text", "read_bundle",
    "summarize_bundle", "write_bundle",
    "gen_synthetic",
    "run_gradcheck", "run_oracle_suite",
]
