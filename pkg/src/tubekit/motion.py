"""Cardinality histograms and temporal cardinality differences.

The motion-stream ground truth: per tube frame, points are soft-binned by
direction around the key point; consecutive histograms are subtracted to
characterize the flow of points over the tube's short time span.
"""

from __future__ import annotations

import numpy as np

from .errors import RangeError
from .geometry import bin_assignments
from .types import CardinalityHistogram, DirectionCodebook, MotionTarget, PointTube


def cardinality_histogram(
    tube_frame: np.ndarray, codebook: DirectionCodebook, interpolate: bool = True
) -> CardinalityHistogram:
    """Histogram one tube frame's (n, 3) local offsets over direction bins.

    Each point contributes its primary/secondary bin weights (total mass 1);
    zero offsets contribute 1/K to every bin.  Accumulation runs in point
    order, so the result is a deterministic function of the ordered offsets.
    """
    primary, secondary, pw, sw, uniform = bin_assignments(tube_frame, codebook, interpolate)
    k = codebook.k
    bins = np.zeros(k, dtype=np.float64)
    directed = ~uniform
    np.add.at(bins, primary[directed], pw[directed])
    np.add.at(bins, secondary[directed], sw[directed])
    n_uniform = int(uniform.sum())
    if n_uniform:
        bins += n_uniform / k
    return CardinalityHistogram(bins)


def compute_motion_target(
    tube: PointTube,
    codebook: DirectionCodebook,
    interpolate: bool = True,
    stride: int = 1,
    normalize: bool = False,
) -> MotionTarget:
    """Temporal cardinality difference matrix for one tube.

    Row t (0-based) is ``histogram(frame t + stride) - histogram(frame t)``,
    giving ``l - stride`` rows; stride 1 yields the (l-1) x K ground truth.
    ``normalize`` divides by n, turning counts into fractions (off by
    default: the raw-count definition).
    """
    l = tube.l
    if not 1 <= stride <= l - 1:
        raise RangeError(f"stride must be in [1, {l - 1}], got {stride}")
    hists = np.stack(
        [cardinality_histogram(tube.local_points[t], codebook, interpolate).bins for t in range(l)]
    )
    cd = hists[stride:] - hists[:-stride]
    if normalize:
        cd = cd / tube.n
    return MotionTarget(cd, temporal_stride=stride)
