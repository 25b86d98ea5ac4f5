import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from histomark import HistogramSpec, bin_counts, bin_plane, build_histogram, compute_mean, group_ratio


class TestComputeMean:
    def test_constant(self):
        assert compute_mean(np.full((8, 8), 128.0)) == 128.0

    def test_two_values(self):
        assert compute_mean(np.array([[0.0, 255.0]])) == 127.5

    def test_matches_compensated_summation(self):
        rng = np.random.default_rng(10)
        plane = rng.uniform(0, 255, (512, 512))
        oracle = math.fsum(plane.ravel().tolist()) / plane.size
        assert abs(compute_mean(plane) - oracle) < 1e-9

    def test_empty_plane_rejected(self):
        with pytest.raises(ValueError):
            compute_mean(np.zeros((0,)))


class TestSpec:
    def test_derived_bins_tile_range(self):
        spec = HistogramSpec.derive(100.0, 0.6, 2.0)
        assert spec.bin_count == 60
        assert spec.lo == pytest.approx(40.0)
        assert spec.hi == pytest.approx(160.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            HistogramSpec.derive(-5.0, 0.6, 2.0)
        with pytest.raises(ValueError):
            HistogramSpec.derive(100.0, 1.2, 2.0)
        with pytest.raises(ValueError):
            HistogramSpec.derive(100.0, 0.6, -1.0)
        with pytest.raises(ValueError, match="degenerate"):
            HistogramSpec.derive(2.0, 0.5, 2.0)  # only one bin fits

    def test_scaled_to_keeps_count_and_tiles(self):
        spec = HistogramSpec.derive(100.0, 0.6, 2.0)
        scaled = spec.scaled_to(110.0)
        assert scaled.bin_count == spec.bin_count
        assert scaled.lo == pytest.approx(0.4 * 110.0)
        assert scaled.hi == pytest.approx(1.6 * 110.0)
        # the width is chosen so the bins tile the rescaled range
        assert 2 * scaled.lam * scaled.mean / scaled.bin_width == pytest.approx(scaled.bin_count)


class TestBinning:
    def test_constant_plane_lands_in_bin_31(self):
        hist = build_histogram(np.full((16, 16), 100.0), 0.6, 2.0)
        assert hist.spec.bin_count == 60
        # 1-based bin 31 covers [100, 102)
        assert hist.counts[30] == 256
        assert hist.counts.sum() == 256
        assert hist.out_of_range == 0
        assert len(hist.members[30]) == 256

    def test_two_cluster_plane(self):
        plane = np.concatenate([np.full(10, 90.0), np.full(10, 110.0)]).reshape(4, 5)
        hist = build_histogram(plane, 0.5, 2.0)
        assert hist.spec.mean == pytest.approx(100.0)
        assert hist.spec.bin_count == 50
        assert hist.spec.lo == pytest.approx(50.0)
        # 90 falls in 1-based bin 21, 110 in bin 31
        assert hist.counts[20] == 10
        assert hist.counts[30] == 10
        assert hist.counts.sum() == 20

    def test_upper_boundary_excluded(self):
        spec = HistogramSpec.derive(100.0, 0.6, 2.0)
        counts = bin_counts(np.array([spec.hi, spec.hi - 1e-9, spec.lo]), spec)
        assert counts.sum() == 2

    def test_members_partition_positions(self):
        rng = np.random.default_rng(11)
        plane = rng.uniform(0, 255, (32, 32))
        hist = build_histogram(plane, 0.6, 2.0)
        all_positions = np.concatenate([m for m in hist.members if m.size])
        assert len(all_positions) == len(set(all_positions.tolist()))
        assert hist.counts.sum() + hist.out_of_range == plane.size
        # every member really falls inside its bin
        flat = plane.ravel()
        for b, members in enumerate(hist.members):
            if members.size:
                vals = flat[members]
                lo = hist.spec.lo + b * hist.spec.bin_width
                assert np.all((vals >= lo) & (vals < lo + hist.spec.bin_width))

    def test_position_permutation_leaves_counts(self):
        rng = np.random.default_rng(12)
        plane = rng.uniform(20, 230, (24, 24))
        hist = build_histogram(plane, 0.6, 2.0)
        shuffled = rng.permutation(plane.ravel()).reshape(plane.shape)
        hist2 = build_histogram(shuffled, 0.6, 2.0)
        assert np.array_equal(hist.counts, hist2.counts)

    def test_value_scaling_covariance(self):
        rng = np.random.default_rng(13)
        plane = rng.uniform(20, 230, (24, 24))
        base = build_histogram(plane, 0.6, 2.0)
        scaled = build_histogram(plane * 2.0, 0.6, 4.0)
        assert scaled.spec.mean == pytest.approx(2.0 * base.spec.mean)
        assert np.array_equal(base.counts, scaled.counts)

    @given(st.integers(0, 2**32 - 1), st.floats(0.2, 0.8), st.floats(0.5, 4.0))
    @settings(max_examples=25, deadline=None)
    def test_conservation_property(self, seed, lam, width):
        rng = np.random.default_rng(seed)
        plane = rng.uniform(1, 255, (16, 16))
        hist = build_histogram(plane, lam, width)
        assert hist.counts.sum() + hist.out_of_range == plane.size


class TestGroupRatio:
    def test_reads_paired_counts(self):
        spec = HistogramSpec.derive(100.0, 0.6, 2.0)
        plane = np.concatenate([np.full(36, 40.5), np.full(24, 42.5)])
        hist = bin_plane(plane, spec)
        assert hist.group(1) == (36, 24)
        assert group_ratio(hist, 1) == (36, 24)

    def test_empty_bins_read_zero(self):
        spec = HistogramSpec.derive(100.0, 0.6, 2.0)
        hist = bin_plane(np.array([100.0]), spec)
        assert hist.group(1) == (0, 0)

    def test_bounds(self):
        spec = HistogramSpec.derive(100.0, 0.6, 2.0)
        hist = bin_plane(np.array([100.0]), spec)
        with pytest.raises(IndexError):
            hist.group(0)
        with pytest.raises(IndexError):
            hist.group(31)  # floor(60/2) == 30 groups
        assert hist.group(30) == (0, 0)
