import numpy as np
import pytest

from tubekit import (
    Frame,
    PointCloudVideo,
    ShapeError,
    validate_video,
    video_from_arrays,
)


def test_minimal_video_is_valid():
    video = video_from_arrays([np.zeros((1, 3))])
    report = validate_video(video)
    assert report.ok
    assert report.violations == ()


def test_nan_coordinate_flagged():
    pts = np.zeros((2, 3))
    pts[1, 2] = np.nan
    video = video_from_arrays([pts])
    report = validate_video(video)
    assert not report.ok
    assert any("non-finite coordinate" in v for v in report.violations)


def test_non_increasing_timestamps_flagged():
    video = video_from_arrays([np.zeros((1, 3)), np.ones((1, 3))], timestamps=[0, 0])
    report = validate_video(video)
    assert not report.ok
    assert any("non-increasing timestamps" in v for v in report.violations)


def test_empty_frame_flagged():
    video = video_from_arrays([np.zeros((0, 3))])
    assert any("no points" in v for v in validate_video(video).violations)


def test_default_timestamps_are_frame_indices():
    video = video_from_arrays([np.zeros((1, 3))] * 4)
    assert video.frame_timestamps.tolist() == [0, 1, 2, 3]


def test_frames_are_read_only():
    video = video_from_arrays([np.zeros((2, 3))])
    with pytest.raises(ValueError):
        video.frames[0].points[0, 0] = 1.0


def test_bad_frame_shape_rejected():
    with pytest.raises(ShapeError):
        Frame(np.zeros((3, 2)))
