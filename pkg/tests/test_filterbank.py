import math

import numpy as np
import pytest

from haarpsi.filters import (
    WAVELETS,
    build_filterbank,
    cascade_1d,
    convolve2d_same,
    get_wavelet,
)

ORTHOGONAL = [name for name, w in WAVELETS.items() if w.orthogonal]
INV_SQRT2 = 1.0 / math.sqrt(2.0)


class TestCascade:
    def test_haar_level1(self):
        h, g = cascade_1d(get_wavelet("haar"), 1)
        assert h == pytest.approx([INV_SQRT2, INV_SQRT2], abs=1e-12)
        assert g == pytest.approx([-INV_SQRT2, INV_SQRT2], abs=1e-12)

    def test_haar_level2(self):
        h, g = cascade_1d(get_wavelet("haar"), 2)
        assert h == pytest.approx([0.5, 0.5, 0.5, 0.5], abs=1e-12)
        assert g == pytest.approx([-0.5, -0.5, 0.5, 0.5], abs=1e-12)

    def test_haar_level3(self):
        h, g = cascade_1d(get_wavelet("haar"), 3)
        scale = 1.0 / (2.0 * math.sqrt(2.0))
        assert g == pytest.approx([-scale] * 4 + [scale] * 4, abs=1e-12)
        assert h == pytest.approx([scale] * 8, abs=1e-12)

    def test_haar_length_doubles(self):
        w = get_wavelet("haar")
        for level in range(1, 5):
            h, g = cascade_1d(w, level)
            assert len(h) == len(g) == 2 ** level

    @pytest.mark.parametrize("level", [1, 2, 3, 4])
    def test_haar_cascade_norms_and_sums(self, level):
        h, g = cascade_1d(get_wavelet("haar"), level)
        assert np.linalg.norm(h) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-10)
        assert np.sum(g) == pytest.approx(0.0, abs=1e-10)
        assert np.sum(h) == pytest.approx(2.0 ** (level / 2.0), abs=1e-10)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            cascade_1d(get_wavelet("haar"), 0)


class TestWaveletTaps:
    @pytest.mark.parametrize("name", ORTHOGONAL)
    def test_unit_norms(self, name):
        w = WAVELETS[name]
        assert np.linalg.norm(w.lowpass) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(w.highpass) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("name", list(WAVELETS))
    def test_vanishing_moment(self, name):
        assert abs(np.sum(WAVELETS[name].highpass)) < 1e-10

    @pytest.mark.parametrize("name", ORTHOGONAL)
    def test_double_shift_orthogonality(self, name):
        w = WAVELETS[name]
        h, g = w.lowpass, w.highpass
        length = len(h)
        for k in range(-(length // 2) + 1, length // 2):
            if k == 0:
                cross = float(np.dot(h, g))
            else:
                shift = 2 * abs(k)
                cross = float(np.dot(h[shift:], g[:-shift]))
                if k < 0:
                    cross = float(np.dot(g[shift:], h[:-shift]))
            assert abs(cross) < 1e-10, f"k={k}"

    @pytest.mark.parametrize("name", ORTHOGONAL)
    def test_self_double_shift_orthonormality(self, name):
        h = WAVELETS[name].lowpass
        for k in range(1, len(h) // 2):
            assert abs(float(np.dot(h[2 * k:], h[:-2 * k]))) < 1e-10

    def test_cdf_lengths_and_zero_sum(self):
        w = WAVELETS["cdf"]
        assert len(w.lowpass) == 9
        assert len(w.highpass) == 7
        assert not w.orthogonal
        assert abs(np.sum(w.highpass)) < 1e-10
        assert np.sum(w.lowpass) == pytest.approx(math.sqrt(2.0), abs=1e-10)

    def test_unknown_wavelet(self):
        with pytest.raises(ValueError, match="unknown wavelet"):
            get_wavelet("nosuch")


class TestFilterBank:
    def test_haar_level1_grids(self):
        bank = build_filterbank("haar", 3)
        assert bank.horizontal[0] == pytest.approx(
            np.array([[-0.5, -0.5], [0.5, 0.5]]), abs=1e-12)
        assert bank.vertical[0] == pytest.approx(
            np.array([[-0.5, 0.5], [-0.5, 0.5]]), abs=1e-12)

    @pytest.mark.parametrize("name", list(WAVELETS))
    def test_vertical_is_transpose(self, name):
        bank = build_filterbank(name, 3)
        for j in range(3):
            assert np.array_equal(bank.vertical[j], bank.horizontal[j].T)

    def test_haar_support(self):
        bank = build_filterbank("haar", 3)
        for j in range(3):
            assert bank.horizontal[j].shape == (2 ** (j + 1), 2 ** (j + 1))


class TestConvolve2dSame:
    def test_identity_kernel(self, rng):
        img = rng.uniform(0, 255, (6, 9))
        out = convolve2d_same(img, np.array([[1.0]]))
        assert np.allclose(out, img, atol=1e-12)

    def test_constant_interior_zero(self):
        bank = build_filterbank("haar", 3)
        img = np.full((12, 12), 9.0)
        for j, grid in enumerate(bank.horizontal):
            out = convolve2d_same(img, grid)
            size = grid.shape[0]
            interior = out[size:-size or None, size:-size or None]
            assert np.max(np.abs(interior)) < 1e-10, f"scale {j + 1}"

    def test_vertical_ramp(self):
        img = np.fromfunction(lambda i, j: i * 1.0, (4, 4))
        grid = build_filterbank("haar", 1).horizontal[0]
        out = convolve2d_same(img, grid)
        # full filter support: rows 0..2, cols 0..2
        assert np.allclose(out[:3, :3], -1.0, atol=1e-9)

    def test_linearity(self, rng):
        x = rng.uniform(-10, 10, (16, 16))
        y = rng.uniform(-10, 10, (16, 16))
        filt = rng.uniform(-1, 1, (3, 4))
        lhs = convolve2d_same(2.5 * x + 0.75 * y, filt)
        rhs = 2.5 * convolve2d_same(x, filt) + 0.75 * convolve2d_same(y, filt)
        assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_even_filter_alignment(self):
        # out[i, j] = sum filt[k, l] * img[i + 1 - k, j + 1 - l] for 2x2
        # filters, so an impulse at (2, 2) reproduces the taps at rows/cols
        # (1..2): tap index floor(size/2) = 1 sits on the impulse.
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        filt = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = convolve2d_same(img, filt)
        expected = np.zeros((5, 5))
        expected[1:3, 1:3] = filt
        assert np.array_equal(out, expected)

    def test_filter_larger_than_image(self, rng):
        # zero padding makes small inputs well defined
        img = rng.uniform(0, 255, (4, 4))
        grid = build_filterbank("haar", 3).horizontal[2]
        out = convolve2d_same(img, grid)
        assert out.shape == (4, 4)
        assert np.all(np.isfinite(out))

    def test_matches_naive_loops(self, rng):
        import naive_reference as ref

        img = rng.uniform(-5, 5, (7, 9))
        for shape in ((2, 2), (3, 3), (4, 2), (1, 5)):
            filt = rng.uniform(-2, 2, shape)
            got = convolve2d_same(img, filt)
            want = np.array(ref.conv2_same(img.tolist(), filt.tolist()))
            assert np.max(np.abs(got - want)) < 1e-10, shape
