import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubekit import (
    Frame,
    RangeError,
    assign_direction,
    ball_query,
    farthest_point_sample,
    octant_codebook,
    section_codebook,
)
from tubekit import rng as tkrng
from tubekit.geometry import bin_assignments
from tubekit.oracle import naive_fps


def _seed_with_first_index(p: int, want: int) -> int:
    for seed in range(10_000):
        if int(tkrng.stream(seed, tkrng.FPS).integers(p)) == want:
            return seed
    raise AssertionError("no seed found")


# ---------------------------------------------------------------------------
# Farthest point sampling


def test_fps_full_selection_covers_all_points():
    frame = Frame(np.random.default_rng(0).uniform(size=(5, 3)))
    idx = farthest_point_sample(frame, 5, seed=3)
    assert sorted(idx.tolist()) == [0, 1, 2, 3, 4]


def test_fps_known_1d_instance():
    xs = np.array([0.0, 1.0, 2.0, 3.0, 10.0])
    frame = Frame(np.stack([xs, np.zeros(5), np.zeros(5)], axis=1))
    seed = _seed_with_first_index(5, 0)
    idx = farthest_point_sample(frame, 3, seed=seed)
    assert idx.tolist() == [0, 4, 3]
    assert naive_fps(frame, 3, first_index=0) == [0, 4, 3]


def test_fps_count_one_returns_seeded_first_pick():
    frame = Frame(np.random.default_rng(1).uniform(size=(7, 3)))
    idx = farthest_point_sample(frame, 1, seed=11)
    expected = int(tkrng.stream(11, tkrng.FPS).integers(7))
    assert idx.tolist() == [expected]


def test_fps_count_out_of_range():
    frame = Frame(np.zeros((4, 3)))
    with pytest.raises(RangeError):
        farthest_point_sample(frame, 0, seed=0)
    with pytest.raises(RangeError):
        farthest_point_sample(frame, 5, seed=0)


def test_fps_spread_beats_uniform_sampling():
    # Minimum pairwise distance of FPS >= uniform random choice in >= 95% of trials.
    def min_pairwise(pts):
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        return d[np.triu_indices_from(d, k=1)].min()

    wins = 0
    trials = 1000
    for t in range(trials):
        gen = np.random.default_rng(10_000 + t)
        pts = gen.uniform(size=(64, 3))
        fps_idx = farthest_point_sample(Frame(pts), 8, seed=t)
        rand_idx = gen.choice(64, size=8, replace=False)
        if min_pairwise(pts[fps_idx]) >= min_pairwise(pts[rand_idx]):
            wins += 1
    assert wins >= 950


# ---------------------------------------------------------------------------
# Ball query


def test_ball_query_full_coverage_is_permutation():
    gen = np.random.default_rng(2)
    pts = gen.uniform(-0.01, 0.01, size=(6, 3))
    idx = ball_query(Frame(pts), np.zeros(3), radius=1.0, n=6, seed=4)
    assert sorted(idx.tolist()) == [0, 1, 2, 3, 4, 5]


def test_ball_query_single_hit_repeats():
    pts = np.array([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 6.0, 0.0]])
    idx = ball_query(Frame(pts), np.zeros(3), radius=1.0, n=4, seed=0)
    assert idx.tolist() == [0, 0, 0, 0]


def test_ball_query_no_hits_falls_back_to_nearest():
    pts = np.array([[3.0, 0.0, 0.0], [2.0, 0.0, 0.0], [4.0, 0.0, 0.0]])
    idx = ball_query(Frame(pts), np.zeros(3), radius=0.5, n=3, seed=0)
    assert idx.tolist() == [1, 1, 1]


def test_ball_query_empty_frame_rejected():
    with pytest.raises(ValueError):
        ball_query(Frame(np.zeros((0, 3))), np.zeros(3), radius=1.0, n=1, seed=0)


def test_ball_query_boundary_is_exclusive():
    pts = np.array([[1.0, 0.0, 0.0], [0.5, 0.0, 0.0]])
    idx = ball_query(Frame(pts), np.zeros(3), radius=1.0, n=2, seed=0)
    assert idx.tolist() == [1, 1]  # the point at exactly r is outside


# ---------------------------------------------------------------------------
# Direction assignment


def test_octant_center_gets_full_weight():
    a = assign_direction(np.array([1.0, 1.0, 1.0]), octant_codebook())
    assert a.primary_bin == 0
    assert a.primary_weight == 1.0
    assert a.secondary_weight == 0.0


def test_thirty_degree_split_planar():
    # 30 deg from the nearest quadrant bisector, 60 deg from the second:
    # weights split (2/3, 1/3).
    cb = section_codebook(4)
    az = np.deg2rad(75.0)
    a = assign_direction(np.array([np.cos(az), np.sin(az), 0.0]), cb)
    assert a.primary_bin == 0 and a.secondary_bin == 1
    assert abs(a.primary_weight - 2.0 / 3.0) < 1e-12
    assert abs(a.secondary_weight - 1.0 / 3.0) < 1e-12


def test_two_to_one_angle_ratio_splits_two_thirds_on_octants():
    # Any offset whose second-nearest angular distance is exactly twice the
    # nearest gets the same (2/3, 1/3) split; found by bisection on a circle
    # of constant nearest-angle around one octant center.
    cb = octant_codebook()
    c1 = cb.centers[0]
    e1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    e2 = np.cross(c1, e1)
    r = np.deg2rad(25.0)

    def u_of(phi):
        return np.cos(r) * c1 + np.sin(r) * (np.cos(phi) * e1 + np.sin(phi) * e2)

    def gap(phi):
        ang = np.sort(np.arccos(np.clip(cb.centers @ u_of(phi), -1.0, 1.0)))
        return ang[1] - 2.0 * ang[0]

    phis = np.linspace(0.0, 2.0 * np.pi, 721)
    lo = hi = None
    for i in range(720):
        if (gap(phis[i]) < 0) != (gap(phis[i + 1]) < 0):
            lo, hi = phis[i], phis[i + 1]
            break
    assert lo is not None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (gap(mid) < 0) == (gap(lo) < 0):
            lo = mid
        else:
            hi = mid
    a = assign_direction(u_of(0.5 * (lo + hi)), cb)
    assert abs(a.primary_weight - 2.0 / 3.0) < 1e-12


def test_negative_y_axis_splits_half_half():
    a = assign_direction(np.array([0.0, -1.0, 0.0]), octant_codebook())
    assert a.primary_weight == 0.5
    assert a.secondary_weight == 0.5
    assert {a.primary_bin, a.secondary_bin} == {2, 3}  # the two y<0, z>=0 octants


def test_zero_offset_is_uniform():
    a = assign_direction(np.zeros(3), octant_codebook())
    assert a.uniform
    assert a.primary_weight + a.secondary_weight == 1.0


def test_no_interpolation_gives_hard_assignment():
    a = assign_direction(np.array([0.2, -0.4, 0.9]), octant_codebook(), interpolate=False)
    assert a.primary_weight == 1.0
    assert a.secondary_weight == 0.0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_weights_sum_to_one_exactly(seed):
    gen = np.random.default_rng(seed)
    offset = gen.normal(size=3)
    for k in (4, 8, 16):
        a = assign_direction(offset, section_codebook(k))
        assert a.primary_weight + a.secondary_weight == 1.0
        assert a.primary_weight >= 0.5


@given(st.integers(0, 2**32 - 1), st.integers(-8, 8))
@settings(max_examples=60, deadline=None)
def test_weights_invariant_under_power_of_two_scaling(seed, exp):
    gen = np.random.default_rng(seed)
    offset = gen.normal(size=3)
    cb = octant_codebook()
    a = assign_direction(offset, cb)
    b = assign_direction(offset * 2.0**exp, cb)
    assert (a.primary_bin, a.secondary_bin) == (b.primary_bin, b.secondary_bin)
    assert a.primary_weight == b.primary_weight


def test_weights_stable_under_general_scaling():
    gen = np.random.default_rng(5)
    cb = octant_codebook()
    for _ in range(50):
        offset = gen.normal(size=3)
        scale = gen.uniform(0.1, 10.0)
        a = assign_direction(offset, cb)
        b = assign_direction(offset * scale, cb)
        assert a.primary_bin == b.primary_bin
        assert abs(a.primary_weight - b.primary_weight) < 1e-12


def test_half_turn_about_z_maps_to_sign_flipped_bins():
    # (x, y, z) -> (-x, -y, z) is exact in floats; the assignment moves to the
    # xy-sign-flipped octant (bin ^ 3) with bitwise identical weights.
    gen = np.random.default_rng(6)
    cb = octant_codebook()
    for _ in range(200):
        offset = gen.normal(size=3)
        rotated = offset * np.array([-1.0, -1.0, 1.0])
        a = assign_direction(offset, cb)
        b = assign_direction(rotated, cb)
        assert b.primary_bin == a.primary_bin ^ 3
        assert b.secondary_bin == a.secondary_bin ^ 3
        assert b.primary_weight == a.primary_weight
        assert b.secondary_weight == a.secondary_weight


def test_batch_assignment_matches_scalar_path():
    gen = np.random.default_rng(7)
    offs = gen.normal(size=(64, 3))
    cb = section_codebook(16)
    primary, secondary, pw, sw, uniform = bin_assignments(offs, cb)
    for i in range(64):
        a = assign_direction(offs[i], cb)
        assert (primary[i], secondary[i]) == (a.primary_bin, a.secondary_bin)
        assert pw[i] == a.primary_weight and sw[i] == a.secondary_weight
        assert not uniform[i]


def test_section_codebooks_have_unit_centers():
    for k in (4, 8, 16):
        cb = section_codebook(k)
        assert cb.k == k
        assert np.abs(np.linalg.norm(cb.centers, axis=1) - 1.0).max() <= 1e-12
    with pytest.raises(RangeError):
        section_codebook(5)
