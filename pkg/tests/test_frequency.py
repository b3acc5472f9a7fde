"""Transforms and band splitting, checked against a direct-summation oracle."""

import numpy as np
import pytest

from freqca import (
    InvalidCutoffError,
    ShapeMismatchError,
    TransformKind,
    dct2,
    dct2_matrix,
    dct3,
    low_band_count,
    recombine,
    split_bands,
)
from conftest import naive_dct2


class TestDct:
    def test_matches_direct_summation(self):
        rng = np.random.default_rng(1)
        for n in (2, 3, 5, 8, 17, 33):
            x = rng.standard_normal(n)
            assert np.allclose(dct2(x), naive_dct2(x), atol=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for n in (2, 4, 7, 31, 64, 129):
            x = rng.standard_normal(n)
            assert np.allclose(dct3(dct2(x)), x, atol=1e-10)

    def test_matrix_orthonormal(self):
        for n in (2, 5, 16, 64):
            m = np.asarray(dct2_matrix(n))
            assert np.allclose(m @ m.T, np.eye(n), atol=1e-12)

    def test_constant_vector_concentrates_at_zero(self):
        # A constant vector (c, ..., c) has a single spectral line of height
        # c * sqrt(n) at index zero under orthonormal scaling.
        for n, c in ((4, 3.0), (9, -1.5), (64, 0.25)):
            coeffs = dct2(np.full(n, c))
            assert coeffs[0] == pytest.approx(c * np.sqrt(n), abs=1e-12)
            assert np.max(np.abs(coeffs[1:])) <= 1e-12

    def test_basis_row_maps_to_unit_coefficient(self):
        m = np.asarray(dct2_matrix(16))
        for k in (0, 3, 15):
            coeffs = dct2(m[k])
            expected = np.zeros(16)
            expected[k] = 1.0
            assert np.allclose(coeffs, expected, atol=1e-12)

    def test_energy_preserved(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(50)
        assert np.sum(dct2(x) ** 2) == pytest.approx(np.sum(x**2), rel=1e-12)

    def test_rowwise_matches_per_vector(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((5, 12))
        rows = dct2(x)
        for i in range(5):
            assert np.allclose(rows[i], dct2(x[i]), atol=1e-12)


class TestLowBandCount:
    def test_dct_quarter_of_64(self):
        assert low_band_count(64, 0.25, TransformKind.DCT) == 16

    def test_fft_quarter_of_64(self):
        assert low_band_count(64, 0.25, TransformKind.FFT) == 8

    def test_float_fuzz_does_not_inflate_count(self):
        # 0.1 * 30 is 3.0000000000000004 in binary; the count must still be
        # the exact-arithmetic ceil, 3.
        assert low_band_count(30, 0.1, TransformKind.DCT) == 3

    def test_none_keeps_everything(self):
        assert low_band_count(10, 0.25, TransformKind.NONE) == 10

    @pytest.mark.parametrize("cutoff", [0.0, 1.0, -0.1, 1.5])
    def test_cutoff_outside_open_interval(self, cutoff):
        with pytest.raises(InvalidCutoffError):
            low_band_count(64, cutoff, TransformKind.DCT)

    def test_band_would_be_full(self):
        # ceil(0.9 * 2) = 2 leaves no high coefficients.
        with pytest.raises(InvalidCutoffError):
            low_band_count(2, 0.9, TransformKind.DCT)

    def test_single_channel_rejected(self):
        with pytest.raises(InvalidCutoffError):
            low_band_count(1, 0.5, TransformKind.DCT)


class TestSplitBands:
    @pytest.mark.parametrize("kind", [TransformKind.DCT, TransformKind.FFT])
    def test_bands_reconstruct_input(self, kind):
        rng = np.random.default_rng(5)
        z = rng.standard_normal((6, 32))
        split = split_bands(z, 0.25, kind)
        assert np.allclose(split.low + split.high, z, atol=1e-9)
        assert np.allclose(recombine(split), z, atol=1e-9)

    @pytest.mark.parametrize("kind", [TransformKind.DCT, TransformKind.FFT])
    def test_energy_partition(self, kind):
        rng = np.random.default_rng(6)
        z = rng.standard_normal((4, 64))
        split = split_bands(z, 0.25, kind)
        total = np.sum(z**2)
        parts = np.sum(split.low**2) + np.sum(split.high**2)
        assert parts == pytest.approx(total, rel=1e-7)

    @pytest.mark.parametrize("kind", [TransformKind.DCT, TransformKind.FFT])
    def test_projection_idempotent(self, kind):
        rng = np.random.default_rng(7)
        z = rng.standard_normal((3, 40))
        split = split_bands(z, 0.25, kind)
        again = split_bands(split.low, 0.25, kind)
        assert np.allclose(again.low, split.low, atol=1e-12)
        assert np.max(np.abs(again.high)) <= 1e-12

    def test_pure_low_signal_has_empty_high_band(self):
        # Tokens built from the first few DCT basis rows only.
        m = np.asarray(dct2_matrix(32))
        z = np.stack([2.0 * m[0] + m[3], -m[1] + 0.5 * m[7]])
        split = split_bands(z, 0.25, TransformKind.DCT)
        assert np.max(np.abs(split.high)) <= 1e-12
        assert np.allclose(split.low, z, atol=1e-12)

    def test_none_split_exact(self):
        rng = np.random.default_rng(8)
        z = rng.standard_normal((4, 8))
        split = split_bands(z, 0.25, TransformKind.NONE)
        assert np.array_equal(split.low, z)
        assert np.all(split.high == 0.0)

    def test_split_is_linear(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((3, 16))
        b = rng.standard_normal((3, 16))
        sa = split_bands(a, 0.25, TransformKind.DCT)
        sb = split_bands(b, 0.25, TransformKind.DCT)
        sab = split_bands(2.0 * a - 3.0 * b, 0.25, TransformKind.DCT)
        assert np.allclose(sab.low, 2.0 * sa.low - 3.0 * sb.low, atol=1e-10)
        assert np.allclose(sab.high, 2.0 * sa.high - 3.0 * sb.high, atol=1e-10)

    def test_requires_2d(self):
        with pytest.raises(ShapeMismatchError):
            split_bands(np.zeros(8), 0.25, TransformKind.DCT)

    def test_rejects_non_finite(self):
        z = np.zeros((2, 8))
        z[0, 0] = np.inf
        with pytest.raises(ValueError):
            split_bands(z, 0.25, TransformKind.DCT)

    def test_bad_cutoff_propagates(self):
        with pytest.raises(InvalidCutoffError):
            split_bands(np.zeros((2, 8)), 1.2, TransformKind.DCT)
