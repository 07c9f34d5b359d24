import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from travscore.core import (
    ConfigurationError,
    ImageFrame,
    PoseStamped,
    TraversabilityVector,
    clamp_scores,
    normalize_yaw,
    section_boundaries,
    split_sections,
)


def frame_of(h, w, c=3, value=0.5):
    return ImageFrame(np.full((c, h, w), value, dtype=np.float32))


class TestSplitSections:
    def test_identity_split(self):
        layout = split_sections(frame_of(10, 227), 1)
        assert layout.boundaries == (0, 227)

    def test_227_by_9_band_widths(self):
        # Oracle: enumerate boundaries and check band widths partition 227.
        layout = split_sections(frame_of(128, 227), 9)
        widths = [b - a for a, b in zip(layout.boundaries, layout.boundaries[1:])]
        assert sorted(set(widths)) == [25, 26]
        assert sum(widths) == 227

    def test_exact_divisibility(self):
        layout = split_sections(frame_of(10, 18), 9)
        widths = [b - a for a, b in zip(layout.boundaries, layout.boundaries[1:])]
        assert widths == [2] * 9

    def test_rejects_bad_k(self):
        with pytest.raises(ConfigurationError):
            split_sections(frame_of(10, 20), 0)
        with pytest.raises(ConfigurationError):
            split_sections(frame_of(10, 20), -3)

    def test_rejects_width_smaller_than_k(self):
        with pytest.raises(ConfigurationError):
            split_sections(frame_of(10, 8), 9)

    @given(w=st.integers(1, 2000), k=st.integers(1, 64))
    def test_bands_partition_width(self, w, k):
        if w < k:
            with pytest.raises(ConfigurationError):
                section_boundaries(w, k)
            return
        bounds = section_boundaries(w, k)
        assert bounds[0] == 0 and bounds[-1] == w
        widths = [b - a for a, b in zip(bounds, bounds[1:])]
        # Disjoint contiguous bands covering every column exactly once.
        assert all(x > 0 for x in widths)
        assert sum(widths) == w
        assert max(widths) - min(widths) <= 1


class TestClampScores:
    def test_in_range_identity(self):
        assert clamp_scores([0.2, 0.9]).scores == (0.2, 0.9)

    def test_saturation(self):
        assert clamp_scores([-0.3, 1.7]).scores == (0.0, 1.0)

    def test_no_quantization(self):
        assert clamp_scores([0.5000001]).scores == (0.5000001,)

    @given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=16))
    def test_idempotent(self, raw):
        once = clamp_scores(raw)
        twice = clamp_scores(once.scores)
        assert once.scores == twice.scores

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            clamp_scores([0.5, float("nan")])


class TestTraversabilityVector:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            TraversabilityVector([0.5, 1.2])
        with pytest.raises(ValueError):
            TraversabilityVector([-0.01])

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            TraversabilityVector([float("nan")])
        with pytest.raises(ValueError):
            TraversabilityVector([float("inf")])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TraversabilityVector([])

    def test_length_and_indexing(self):
        t = TraversabilityVector([0.1, 0.2, 0.3])
        assert t.k == len(t) == 3
        assert t[1] == 0.2
        assert t.as_array().dtype == np.float64


class TestImageFrame:
    def test_rejects_out_of_range_pixels(self):
        with pytest.raises(ValueError):
            ImageFrame(np.full((3, 4, 4), 1.5))

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValueError):
            ImageFrame(np.zeros((4, 4)))

    def test_pixels_read_only(self):
        f = frame_of(4, 6)
        with pytest.raises(ValueError):
            f.pixels[0, 0, 0] = 0.0

    def test_shape_accessors(self):
        f = frame_of(5, 7, c=3)
        assert (f.channels, f.height, f.width) == (3, 5, 7)


class TestPoseStamped:
    @given(st.floats(-720, 720, allow_nan=False))
    def test_yaw_normalized(self, yaw):
        p = PoseStamped(x=0.0, y=0.0, yaw=yaw)
        assert -180.0 <= p.yaw <= 180.0
        # Same direction modulo 360.
        assert math.isclose(math.cos(math.radians(p.yaw)), math.cos(math.radians(yaw)), abs_tol=1e-9)
        assert math.isclose(math.sin(math.radians(p.yaw)), math.sin(math.radians(yaw)), abs_tol=1e-9)

    def test_normalize_yaw_edges(self):
        assert normalize_yaw(180.0) == -180.0
        assert normalize_yaw(-180.0) == -180.0
        assert normalize_yaw(190.0) == pytest.approx(-170.0)
