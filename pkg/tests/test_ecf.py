import numpy as np
import pytest
from numpy.testing import assert_allclose

from ami.ecf import build_filter, ecf_eval
from ami.grid import FrequencyGrid, GridConfig


def _freq(lo, hi, n=256):
    return FrequencyGrid(GridConfig(lower=(lo,), upper=(hi,), points_per_dim=(n,)))


class TestExactEcf:
    def test_single_point_at_origin_is_one_everywhere(self):
        freq = _freq(-1.0, 1.0, 64)
        ecf = ecf_eval([0.0], freq, mode="exact")
        assert_allclose(ecf.values, 1.0, atol=1e-14)

    def test_two_symmetric_points_give_cosine(self):
        freq = _freq(-2.0, 2.0, 128)
        ecf = ecf_eval([-1.0, 1.0], freq, mode="exact")
        t = freq.freqs[0]
        assert_allclose(ecf.values.real, np.cos(t), atol=1e-12)
        assert_allclose(ecf.values.imag, 0.0, atol=1e-12)

    def test_matches_normal_cf_within_sampling_error(self):
        # E C(t) = exp(-t^2/2) for standard normal data; spread is O(1/sqrt(n))
        x = np.random.default_rng(7).standard_normal(200)
        freq = _freq(x.min() - 1, x.max() + 1, 256)
        ecf = ecf_eval(x, freq, mode="exact")
        t = freq.freqs[0]
        node = np.argmin(np.abs(t - 1.0))
        assert abs(ecf.values[node] - np.exp(-t[node] ** 2 / 2)) <= 3.0 / np.sqrt(200)

    def test_conjugate_symmetry(self, rng):
        x = rng.exponential(1.0, 300)
        freq = _freq(x.min() - 1, x.max() + 1, 128)
        v = ecf_eval(x, freq, mode="exact").values
        assert_allclose(v[1:], np.conj(v[1:][::-1]), atol=1e-12)

    def test_modulus_bounded_and_zero_value(self, rng):
        x = rng.standard_normal(500)
        ecf = ecf_eval(x, _freq(x.min() - 1, x.max() + 1), mode="exact")
        assert np.abs(ecf.values).max() <= 1.0 + 1e-12
        assert ecf.values[ecf.freq_grid.zero_index] == 1.0

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            ecf_eval(np.empty(0), _freq(0.0, 1.0, 64))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            ecf_eval([0.0, np.inf], _freq(0.0, 1.0, 64))


class TestBinnedEcf:
    def test_agrees_with_exact_on_filtered_region_1d(self):
        x = np.random.default_rng(11).standard_normal(2000)
        grid = GridConfig.from_data(x)
        freq = FrequencyGrid(grid)
        exact = ecf_eval(x, freq, mode="exact")
        binned = ecf_eval(x, freq, mode="binned")
        mask = build_filter(exact).included
        rel = np.abs(binned.values[mask] - exact.values[mask]) / np.abs(exact.values[mask])
        assert rel.max() <= 1e-3

    def test_agrees_with_exact_on_filtered_region_2d(self):
        g = np.random.default_rng(12)
        pts = g.multivariate_normal([0, 0], [[1, 0.6], [0.6, 1]], 400)
        grid = GridConfig.from_data(pts)
        freq = FrequencyGrid(grid)
        exact = ecf_eval(pts, freq, mode="exact")
        binned = ecf_eval(pts, freq, mode="binned")
        mask = build_filter(exact).included
        rel = np.abs(binned.values[mask] - exact.values[mask]) / np.abs(exact.values[mask])
        assert rel.max() <= 1e-3

    def test_points_outside_domain_rejected(self, rng):
        x = rng.standard_normal(50)
        grid = GridConfig(lower=(-1.0,), upper=(1.0,), points_per_dim=(64,))
        with pytest.raises(ValueError, match="padded domain"):
            ecf_eval(10 * x, FrequencyGrid(grid), mode="binned")

    def test_zero_frequency_is_exactly_one(self, rng):
        x = rng.standard_normal(321)
        freq = FrequencyGrid(GridConfig.from_data(x))
        ecf = ecf_eval(x, freq, mode="binned")
        assert ecf.values[freq.zero_index] == 1.0 + 0.0j


class TestAutoMode:
    def test_auto_picks_exact_below_budget(self, rng):
        x = rng.standard_normal(100)
        ecf = ecf_eval(x, _freq(x.min() - 1, x.max() + 1, 256), mode="auto")
        assert ecf.mode == "exact"

    def test_auto_picks_binned_above_budget(self, rng):
        pts = rng.standard_normal((2000, 2))
        freq = FrequencyGrid(GridConfig.from_data(pts))
        assert ecf_eval(pts, freq, mode="auto").mode == "binned"
