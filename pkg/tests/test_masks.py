import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eyeseg.errors import (
    EmptyMaskError,
    InvalidFactorError,
    InvalidFractionError,
    NoBackgroundError,
)
from eyeseg.masks import (
    BACKGROUND,
    FOREGROUND,
    Box,
    bounding_box,
    boundary_pixels,
    make_rng,
    perturb_box,
    sample_points_in_mask,
    sample_points_outside_mask_in_box,
    scale_box,
)

from oracles import brute_bbox, brute_boundary, random_blob


def mask_from(coords, width, height):
    m = np.zeros((height, width), dtype=bool)
    for x, y in coords:
        m[y, x] = True
    return m


small_masks = st.builds(
    lambda seed, w, h: random_blob(make_rng(seed), w, h),
    st.integers(0, 10_000),
    st.integers(2, 24),
    st.integers(2, 24),
)


class TestBox:
    def test_rejects_inverted_corners(self):
        with pytest.raises(ValueError):
            Box(5, 0, 4, 0)

    def test_inclusive_sizes(self):
        b = Box(2, 3, 2, 5)
        assert (b.width, b.height, b.area) == (1, 3, 3)

    def test_clamped(self):
        assert Box(-3, -1, 50, 8).clamped((10, 10)) == Box(0, 0, 9, 8)


class TestBoundingBox:
    def test_single_pixel(self):
        m = mask_from([(5, 7)], 10, 10)
        assert bounding_box(m) == Box(5, 7, 5, 7)

    def test_full_frame(self):
        assert bounding_box(np.ones((10, 10), bool)) == Box(0, 0, 9, 9)

    def test_l_shape(self):
        m = mask_from([(1, 1), (1, 4), (3, 1)], 6, 6)
        assert bounding_box(m) == Box(1, 1, 3, 4)

    def test_empty_raises(self):
        with pytest.raises(EmptyMaskError):
            bounding_box(np.zeros((4, 4), bool))

    @settings(max_examples=60)
    @given(small_masks)
    def test_tight_and_contains_all(self, mask):
        if not mask.any():
            return
        box = bounding_box(mask)
        assert (brute_bbox(mask)) == box.as_xyxy()
        ys, xs = np.nonzero(mask)
        assert xs.min() == box.x_min and xs.max() == box.x_max
        assert ys.min() == box.y_min and ys.max() == box.y_max
        # shrinking any edge by one drops at least one foreground pixel
        assert (xs == box.x_min).any() and (xs == box.x_max).any()
        assert (ys == box.y_min).any() and (ys == box.y_max).any()


class TestScaleBox:
    def test_doubling_preserves_center(self):
        assert scale_box(Box(10, 10, 20, 20), 2.0, (100, 100)) == Box(5, 5, 25, 25)

    def test_identity(self):
        b = Box(3, 4, 9, 11)
        assert scale_box(b, 1.0, (100, 100)) == b

    def test_clamped_to_bounds(self):
        assert scale_box(Box(0, 0, 10, 10), 2.0, (12, 12)) == Box(0, 0, 11, 11)

    @pytest.mark.parametrize("factor", [0.0, -1.0])
    def test_invalid_factor(self, factor):
        with pytest.raises(InvalidFactorError):
            scale_box(Box(0, 0, 1, 1), factor, (10, 10))


class TestPerturbBox:
    def test_zero_fraction_is_identity(self):
        b = Box(10, 10, 20, 20)
        assert perturb_box(b, 0.0, make_rng(1), (100, 100)) == b

    def test_displacement_bound(self):
        b = Box(10, 10, 20, 20)  # sides 11, 0.2 * 11 rounds to at most 2
        for seed in range(1000):
            p = perturb_box(b, 0.2, make_rng(seed), (100, 100))
            for got, ref in zip(p.as_xyxy(), b.as_xyxy()):
                assert abs(got - ref) <= 2

    def test_deterministic(self):
        b = Box(5, 8, 30, 22)
        assert perturb_box(b, 0.1, make_rng(42), (64, 64)) == perturb_box(
            b, 0.1, make_rng(42), (64, 64)
        )

    def test_stays_in_bounds_and_nonempty(self):
        b = Box(0, 0, 9, 9)
        for seed in range(200):
            p = perturb_box(b, 0.5, make_rng(seed), (10, 10))
            assert 0 <= p.x_min <= p.x_max <= 9
            assert 0 <= p.y_min <= p.y_max <= 9
            assert p.area >= 1

    @pytest.mark.parametrize("fraction", [-0.1, 1.0, 1.5])
    def test_invalid_fraction(self, fraction):
        with pytest.raises(InvalidFractionError):
            perturb_box(Box(0, 0, 5, 5), fraction, make_rng(0), (10, 10))


class TestSamplePointsInMask:
    def test_single_pixel_forced(self):
        m = mask_from([(2, 3)], 5, 5)
        pts = sample_points_in_mask(m, 4, make_rng(0))
        assert pts == [(2, 3, FOREGROUND)] * 4

    def test_membership(self, eye_labels):
        m = eye_labels == 2
        pts = sample_points_in_mask(m, 4, make_rng(9))
        assert all(m[p.y, p.x] for p in pts)
        assert all(p.label == FOREGROUND for p in pts)

    def test_deterministic(self, eye_labels):
        m = eye_labels == 1
        assert sample_points_in_mask(m, 8, make_rng(3)) == sample_points_in_mask(
            m, 8, make_rng(3)
        )

    def test_empty_mask(self):
        with pytest.raises(EmptyMaskError):
            sample_points_in_mask(np.zeros((3, 3), bool), 1, make_rng(0))

    def test_bad_count(self):
        with pytest.raises(ValueError):
            sample_points_in_mask(np.ones((3, 3), bool), 0, make_rng(0))


class TestSampleOutsideMaskInBox:
    def test_single_candidate_forced(self):
        m = np.ones((6, 6), dtype=bool)
        m[3, 4] = False
        pts = sample_points_outside_mask_in_box(m, Box(0, 0, 5, 5), 3, make_rng(0))
        assert pts == [(4, 3, BACKGROUND)] * 3

    def test_inside_box_and_off_mask(self, eye_labels):
        m = eye_labels == 3
        box = scale_box(bounding_box(m), 2.0, (m.shape[1], m.shape[0]))
        pts = sample_points_outside_mask_in_box(m, box, 16, make_rng(5))
        for p in pts:
            assert box.contains(p.x, p.y)
            assert not m[p.y, p.x]
            assert p.label == BACKGROUND

    def test_negatives_avoid_target_class(self, eye_labels):
        # doubled pupil box: every candidate lands on iris / sclera / background
        pupil = eye_labels == 3
        box = scale_box(bounding_box(pupil), 2.0, (pupil.shape[1], pupil.shape[0]))
        pts = sample_points_outside_mask_in_box(pupil, box, 50, make_rng(7))
        assert all(eye_labels[p.y, p.x] in (0, 1, 2) for p in pts)

    def test_fully_covered_box(self):
        m = np.ones((4, 4), dtype=bool)
        with pytest.raises(NoBackgroundError):
            sample_points_outside_mask_in_box(m, Box(0, 0, 3, 3), 1, make_rng(0))


class TestBoundaryPixels:
    def test_filled_square_perimeter(self):
        m = np.zeros((5, 5), bool)
        m[1:4, 1:4] = True
        got = {tuple(p) for p in boundary_pixels(m)}
        assert got == brute_boundary(m)
        assert len(got) == 8 and (2, 2) not in got

    def test_single_pixel(self):
        m = mask_from([(2, 2)], 5, 5)
        assert {tuple(p) for p in boundary_pixels(m)} == {(2, 2)}

    def test_full_image_outer_ring(self):
        m = np.ones((4, 6), bool)
        got = {tuple(p) for p in boundary_pixels(m)}
        expected = {
            (x, y)
            for x in range(6)
            for y in range(4)
            if x in (0, 5) or y in (0, 3)
        }
        assert got == expected

    def test_empty(self):
        assert boundary_pixels(np.zeros((3, 3), bool)).shape == (0, 2)

    @settings(max_examples=60)
    @given(small_masks)
    def test_matches_neighbor_scan(self, mask):
        got = {tuple(p) for p in boundary_pixels(mask)}
        assert got == brute_boundary(mask)
        fg = {(int(x), int(y)) for y, x in zip(*np.nonzero(mask))}
        assert got <= fg
