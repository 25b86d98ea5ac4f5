import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from histomark import GrayImage, ber, capacity, normalized_correlation, psnr


def make(px, depth=8):
    return GrayImage(np.asarray(px, dtype=float), bit_depth=depth)


class TestPsnr:
    def test_identical_images(self):
        img = make(np.full((8, 8), 40.0))
        rep = psnr(img, img)
        assert rep.mse == 0.0
        assert math.isinf(rep.psnr_db)
        assert rep.max_abs_diff == 0.0
        assert rep.mean_shift == 0.0

    def test_off_by_one_everywhere(self):
        a = make(np.full((16, 16), 100.0))
        b = make(np.full((16, 16), 101.0))
        rep = psnr(a, b)
        assert rep.mse == 1.0
        assert rep.psnr_db == pytest.approx(10.0 * math.log10(255.0**2), abs=1e-3)
        assert rep.psnr_db == pytest.approx(48.1308, abs=1e-3)
        assert rep.mean_shift == 1.0

    def test_full_swing_is_zero_db(self):
        a = make(np.zeros((4, 4)))
        b = make(np.full((4, 4), 255.0))
        rep = psnr(a, b)
        assert rep.mse == 65025.0
        assert rep.psnr_db == pytest.approx(0.0, abs=1e-12)
        assert rep.max_abs_diff == 255.0

    def test_symmetry(self):
        rng = np.random.default_rng(31)
        a = make(rng.integers(0, 256, (12, 12)))
        b = make(rng.integers(0, 256, (12, 12)))
        assert psnr(a, b) == psnr(b, a)

    def test_sixteen_bit_peak(self):
        a = make(np.full((4, 4), 0.0), depth=16)
        b = make(np.full((4, 4), 1.0), depth=16)
        assert psnr(a, b).psnr_db == pytest.approx(20.0 * math.log10(65535.0), abs=1e-9)

    def test_mismatch_rejected(self):
        with pytest.raises(ValueError):
            psnr(make(np.zeros((4, 4))), make(np.zeros((4, 5))))
        with pytest.raises(ValueError):
            psnr(make(np.zeros((4, 4))), make(np.zeros((4, 4)), depth=16))


class TestBitMetrics:
    def test_ber_trivials(self):
        assert ber([1, 0, 1, 1], [1, 0, 1, 1]) == 0.0
        assert ber([1, 0], [0, 1]) == 1.0
        assert ber([1] * 12 + [0] * 4, [1] * 16) == 0.25

    def test_correlation_trivials(self):
        assert normalized_correlation([1, 0, 1], [1, 0, 1]) == 1.0
        assert normalized_correlation([1, 0], [0, 1]) == -1.0
        assert normalized_correlation([1, 1, 0, 0], [1, 0, 0, 1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ber([1, 0], [1])
        with pytest.raises(ValueError):
            normalized_correlation([1, 0], [1])

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=64))
    @settings(max_examples=60, deadline=None)
    def test_correlation_is_one_minus_twice_ber(self, pairs):
        d = [p[0] for p in pairs]
        e = [p[1] for p in pairs]
        assert normalized_correlation(d, e) == pytest.approx(1.0 - 2.0 * ber(d, e), abs=1e-12)


class TestCapacity:
    def test_reference_points(self):
        assert capacity(128.0, 0.6, 2.0, 2) == 38
        assert capacity(128.0, 1.0, 1.0, 2) == 128  # full-range 8-bit maximum
        assert capacity(100.0, 0.5, 2.0, 2) == 25

    def test_monotonicity(self):
        qs = [capacity(q, 0.5, 2.0, 2) for q in (50, 100, 150, 200)]
        assert qs == sorted(qs)
        ps = [capacity(128, p, 2.0, 2) for p in (0.2, 0.4, 0.6, 0.8)]
        assert ps == sorted(ps)
        ms = [capacity(128, 0.5, m, 2) for m in (1.0, 2.0, 4.0)]
        assert ms == sorted(ms, reverse=True)
        gs = [capacity(128, 0.5, 2.0, g) for g in (1, 2, 4)]
        assert gs == sorted(gs, reverse=True)

    def test_domain(self):
        with pytest.raises(ValueError):
            capacity(0.0, 0.5, 2.0, 2)
        with pytest.raises(ValueError):
            capacity(128, 0.0, 2.0, 2)
        with pytest.raises(ValueError):
            capacity(128, 1.1, 2.0, 2)
        with pytest.raises(ValueError):
            capacity(128, 0.5, 0.0, 2)
        with pytest.raises(ValueError):
            capacity(128, 0.5, 2.0, 0)
