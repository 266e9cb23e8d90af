"""Stability filter, transform kernel, and the fixed-point verification path."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ami.ecf import (
    EcfGrid,
    build_filter,
    ecf_eval,
    fixed_point_iterate,
    transform_kernel,
)
from ami.grid import FrequencyGrid, GridConfig


def _freq(n_nodes=64, lo=-1.0, hi=1.0):
    return FrequencyGrid(GridConfig(lower=(lo,), upper=(hi,), points_per_dim=(n_nodes,)))


def _synthetic_ecf(moduli: np.ndarray, n: int, freq=None) -> EcfGrid:
    """ECF grid with prescribed moduli (value at zero forced to 1)."""
    freq = freq or _freq(len(moduli))
    values = moduli.astype(complex)
    values[len(moduli) // 2] = 1.0
    return EcfGrid(values=values, n=n, freq_grid=freq, mode="exact")


def _flood_fill_oracle(above: np.ndarray, start: tuple[int, ...]) -> np.ndarray:
    """Breadth-first flood fill over face-adjacent nodes, independent of ndimage."""
    reached = np.zeros_like(above, dtype=bool)
    stack = [start]
    reached[start] = above[start]
    while stack:
        node = stack.pop()
        for ax in range(above.ndim):
            for step in (-1, 1):
                nxt = list(node)
                nxt[ax] += step
                if not 0 <= nxt[ax] < above.shape[ax]:
                    continue
                nxt = tuple(nxt)
                if above[nxt] and not reached[nxt]:
                    reached[nxt] = True
                    stack.append(nxt)
    return reached


class TestThreshold:
    def test_n2_threshold_is_one(self):
        moduli = np.full(64, 0.999)
        mask = build_filter(_synthetic_ecf(moduli, n=2))
        # only |C|=1 nodes can pass, so just t=0 survives
        assert mask.threshold == 1.0
        assert mask.size == 1
        assert mask.included[32]

    def test_n100_threshold_value(self):
        mask = build_filter(_synthetic_ecf(np.zeros(64), n=100))
        assert_allclose(mask.threshold, 0.0396)

    def test_zero_node_always_included(self, rng):
        x = rng.standard_normal(50)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        assert build_filter(ecf).included[ecf.freq_grid.zero_index]


class TestFloodFill:
    def test_distant_island_excluded(self):
        moduli = np.zeros(64)
        moduli[30:35] = 0.9  # block around zero (index 32)
        moduli[50:53] = 0.9  # separate island, above threshold but disconnected
        moduli[12:15] = 0.9  # its mirror image (the admissible set is symmetric)
        mask = build_filter(_synthetic_ecf(moduli, n=100))
        assert mask.included[30:35].all()
        assert not mask.included[50:53].any()
        assert not mask.included[12:15].any()

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_bfs_oracle_on_random_ecfs(self, seed):
        g = np.random.default_rng(seed)
        x = g.standard_normal(150) + (seed % 2) * g.exponential(1.0, 150)
        grid = GridConfig.from_data(x, points_per_dim=128)
        ecf = ecf_eval(x, FrequencyGrid(grid), mode="exact")
        mask = build_filter(ecf)
        above = ecf.abs_sq >= mask.threshold
        above[0] = False  # unpaired Nyquist bin, excluded by policy
        core = above[1:]
        above[1:] = core & core[::-1]
        expected = _flood_fill_oracle(above, (64,))
        assert np.array_equal(mask.included, expected)

    def test_matches_bfs_oracle_2d(self):
        g = np.random.default_rng(3)
        pts = g.multivariate_normal([0, 0], [[1, 0.4], [0.4, 1]], 300)
        grid = GridConfig.from_data(pts, points_per_dim=64)
        ecf = ecf_eval(pts, FrequencyGrid(grid), mode="exact")
        mask = build_filter(ecf)
        above = ecf.abs_sq >= mask.threshold
        above[0, :] = False
        above[:, 0] = False
        core = above[1:, 1:]
        above[1:, 1:] = core & core[::-1, ::-1]
        expected = _flood_fill_oracle(above, (32, 32))
        assert np.array_equal(mask.included, expected)

    def test_mask_closed_under_negation(self, rng):
        x = rng.exponential(1.0, 400)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        inc = build_filter(ecf).included
        assert np.array_equal(inc[1:], inc[1:][::-1])

    def test_mask_grows_with_n_statistically(self):
        # nested samples on a fixed grid: larger n lowers the threshold, so
        # the admitted block should (almost always) grow
        grid = GridConfig(lower=(-6.0,), upper=(6.0,), points_per_dim=(1024,))
        freq = FrequencyGrid(grid)
        grow = 0
        trials = 25
        for seed in range(trials):
            x = np.random.default_rng(seed).standard_normal(2000)
            small = build_filter(ecf_eval(x[:500], freq, mode="exact")).size
            big = build_filter(ecf_eval(x, freq, mode="exact")).size
            grow += big >= small
        assert grow >= 0.8 * trials


class TestTransformKernel:
    def test_kappa_is_one_at_unit_modulus(self):
        moduli = np.zeros(64)
        moduli[31:34] = 1.0
        ecf = _synthetic_ecf(moduli, n=100)
        kernel = transform_kernel(ecf, build_filter(ecf))
        assert kernel.values[31] == 1.0 and kernel.values[32] == 1.0

    def test_kappa_zero_outside_filter(self, rng):
        x = rng.standard_normal(200)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        mask = build_filter(ecf)
        kernel = transform_kernel(ecf, mask)
        assert np.all(kernel.values[~mask.included] == 0.0)

    def test_kappa_at_threshold_modulus(self):
        n = 100
        thresh = 4.0 * (n - 1.0) / n**2
        thresh_mod = np.sqrt(thresh)
        while thresh_mod * thresh_mod < thresh:  # land exactly on/over the threshold
            thresh_mod = np.nextafter(thresh_mod, 1.0)
        moduli = np.zeros(64)
        moduli[31:34] = [thresh_mod, 1.0, thresh_mod]
        ecf = _synthetic_ecf(moduli, n=n)
        kernel = transform_kernel(ecf, build_filter(ecf))
        # the square-root term vanishes at the threshold (up to sqrt rounding)
        assert_allclose(kernel.values[33], n / (2.0 * (n - 1.0)), rtol=1e-7)

    def test_kappa_range_on_included_nodes(self, rng):
        x = rng.standard_normal(500)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        mask = build_filter(ecf)
        k = transform_kernel(ecf, mask).values[mask.included]
        n = ecf.n
        assert np.all(k >= 0.0) and np.all(k <= n / (n - 1.0))


class TestFixedPoint:
    def test_unit_modulus_fixed_point_is_one(self):
        moduli = np.zeros(64)
        moduli[31:34] = 1.0
        ecf = _synthetic_ecf(moduli, n=50)
        res = fixed_point_iterate(ecf, build_filter(ecf))
        assert res.converged
        assert_allclose(res.phi[31:34].real, 1.0, atol=1e-9)

    def test_masked_out_nodes_stay_zero(self, rng):
        x = rng.standard_normal(300)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        mask = build_filter(ecf)
        res = fixed_point_iterate(ecf, mask, max_iter=5000)
        assert np.all(res.phi[~mask.included] == 0.0)

    def test_matches_closed_form_on_random_ecf(self):
        x = np.random.default_rng(99).standard_normal(500)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        mask = build_filter(ecf)
        res = fixed_point_iterate(ecf, mask, max_iter=500_000, tol=1e-13)
        closed = transform_kernel(ecf, mask).values * ecf.values
        assert res.converged
        assert np.abs(res.phi - closed)[mask.included].max() <= 1e-8

    def test_non_convergence_warns(self, rng):
        x = rng.standard_normal(200)
        ecf = ecf_eval(x, FrequencyGrid(GridConfig.from_data(x)), mode="exact")
        with pytest.warns(RuntimeWarning, match="did not reach"):
            res = fixed_point_iterate(ecf, build_filter(ecf), max_iter=2)
        assert not res.converged
