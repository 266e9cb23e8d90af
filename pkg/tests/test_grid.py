import numpy as np
import pytest
from numpy.testing import assert_allclose

from ami.grid import DensityEstimate, FrequencyGrid, GridConfig, density_at, integrate_box


class TestGridConfig:
    def test_from_data_pads_and_contains(self, rng):
        x = rng.standard_normal(100)
        grid = GridConfig.from_data(x)
        assert grid.dims == 1
        assert grid.points_per_dim == (1024,)
        assert grid.lower[0] < x.min() and grid.upper[0] > x.max()
        assert grid.contains(x).all()
        span = x.max() - x.min()
        assert_allclose(grid.lower[0], x.min() - 0.25 * span)
        assert_allclose(grid.upper[0], x.max() + 0.25 * span)

    def test_2d_defaults(self, rng):
        pts = rng.standard_normal((50, 2))
        grid = GridConfig.from_data(pts)
        assert grid.points_per_dim == (256, 256)

    @pytest.mark.parametrize("bad", [15, 100, 0])
    def test_rejects_non_power_of_two(self, bad):
        with pytest.raises(ValueError, match="power of two"):
            GridConfig(lower=(0.0,), upper=(1.0,), points_per_dim=(bad,))

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError, match="bounds"):
            GridConfig(lower=(1.0,), upper=(0.0,), points_per_dim=(64,))

    def test_rejects_zero_range_data(self):
        with pytest.raises(ValueError, match="zero data range"):
            GridConfig.from_data(np.ones(10))

    def test_unit_square(self):
        grid = GridConfig.unit_square()
        assert grid.lower == (-0.375, -0.375)
        assert grid.upper == (1.375, 1.375)

    def test_axes_inclusive(self):
        grid = GridConfig(lower=(0.0,), upper=(1.0,), points_per_dim=(64,))
        ax = grid.axes()[0]
        assert ax[0] == 0.0 and ax[-1] == 1.0 and len(ax) == 64


class TestFrequencyGrid:
    def test_zero_is_a_node(self):
        grid = GridConfig(lower=(-2.0,), upper=(3.0,), points_per_dim=(128,))
        freq = FrequencyGrid(grid)
        assert freq.freqs[0][freq.zero_index[0]] == 0.0

    def test_closed_under_negation_except_unpaired_nyquist(self):
        grid = GridConfig(lower=(-2.0,), upper=(3.0,), points_per_dim=(128,))
        t = FrequencyGrid(grid).freqs[0]
        # ascending, one unpaired most-negative bin, the rest mirror exactly
        assert np.all(np.diff(t) > 0)
        assert_allclose(t[1:], -t[1:][::-1], atol=0)

    def test_spacing_matches_period(self):
        grid = GridConfig(lower=(0.0,), upper=(2.0,), points_per_dim=(64,))
        freq = FrequencyGrid(grid)
        dx = grid.spacing()[0]
        assert_allclose(freq.spacing[0], 2 * np.pi / (64 * dx))


def _uniform_estimate(n_nodes=64):
    """Hand-built uniform density on [0, 1] for interpolation tests."""
    grid = GridConfig(lower=(0.0,), upper=(1.0,), points_per_dim=(n_nodes,))
    values = np.ones(n_nodes)
    phi = np.zeros(n_nodes, dtype=complex)
    phi[n_nodes // 2] = 1.0
    return DensityEstimate(
        grid=grid,
        values=values,
        phi_hat=phi,
        filter_mask=np.zeros(n_nodes, dtype=bool),
        pre_clip_mass=1.0,
        n_samples=10,
    )


class TestDensityEstimateContainer:
    def test_mass_validation(self):
        est = _uniform_estimate()
        assert_allclose(integrate_box(est), 1.0, atol=1e-12)
        with pytest.raises(ValueError, match="mass"):
            DensityEstimate(
                grid=est.grid,
                values=2 * est.values,
                phi_hat=est.phi_hat,
                filter_mask=est.filter_mask,
                pre_clip_mass=1.0,
                n_samples=10,
            )

    def test_phi0_validation(self):
        est = _uniform_estimate()
        bad_phi = est.phi_hat.copy()
        bad_phi[32] = 1.0 + 1e-6
        with pytest.raises(ValueError, match="phi_hat"):
            DensityEstimate(
                grid=est.grid,
                values=est.values,
                phi_hat=bad_phi,
                filter_mask=est.filter_mask,
                pre_clip_mass=1.0,
                n_samples=10,
            )

    def test_pre_clip_mass_warns_out_of_band(self):
        est = _uniform_estimate()
        with pytest.warns(RuntimeWarning, match="pre-clip mass"):
            DensityEstimate(
                grid=est.grid,
                values=est.values,
                phi_hat=est.phi_hat,
                filter_mask=est.filter_mask,
                pre_clip_mass=0.8,
                n_samples=10,
            )


class TestInterpolation:
    def test_node_value_identity(self):
        est = _uniform_estimate()
        est.values = est.values.copy()
        est.values[10] = 1.5  # break flatness at one node (mass check already done)
        ax = est.axes[0]
        assert density_at(est, [ax[10]])[0] == 1.5

    def test_midpoint_linear(self):
        est = _uniform_estimate()
        est.values = est.values.copy()
        est.values[10] = 0.2
        est.values[11] = 0.4
        ax = est.axes[0]
        mid = 0.5 * (ax[10] + ax[11])
        assert_allclose(density_at(est, [mid])[0], 0.3, rtol=1e-12)

    def test_outside_returns_floor(self):
        est = _uniform_estimate()
        out = density_at(est, [-5.0, 5.0])
        assert_allclose(out, est.floor_epsilon)

    def test_clamp_floors_small_values(self):
        est = _uniform_estimate()
        est.values = est.values.copy()
        est.values[:2] = 0.0
        assert density_at(est, [0.0], clamp=True)[0] == est.floor_epsilon
        assert density_at(est, [0.0], clamp=False)[0] == 0.0

    def test_rejects_non_finite_query(self):
        est = _uniform_estimate()
        with pytest.raises(ValueError, match="finite"):
            density_at(est, [np.nan])


class TestIntegrateBox:
    def test_full_domain_equals_trapezoid(self, rng):
        grid = GridConfig(lower=(0.0,), upper=(2.0,), points_per_dim=(64,))
        values = rng.uniform(0.5, 1.5, 64)
        values /= np.trapezoid(values, dx=grid.spacing()[0])
        est = DensityEstimate(
            grid=grid,
            values=values,
            phi_hat=_uniform_estimate().phi_hat,
            filter_mask=np.zeros(64, dtype=bool),
            pre_clip_mass=1.0,
            n_samples=10,
        )
        assert_allclose(integrate_box(est), np.trapezoid(values, dx=grid.spacing()[0]), rtol=1e-12)

    def test_sub_box_on_linear_density(self):
        # density f(x) = 2x on [0,1]: interpolant is exact, so any sub-box is exact
        grid = GridConfig(lower=(0.0,), upper=(1.0,), points_per_dim=(128,))
        ax = grid.axes()[0]
        values = 2.0 * ax
        values /= np.trapezoid(values, ax)
        phi = np.zeros(128, dtype=complex)
        phi[64] = 1.0
        est = DensityEstimate(
            grid=grid, values=values, phi_hat=phi,
            filter_mask=np.zeros(128, dtype=bool), pre_clip_mass=1.0, n_samples=10,
        )
        assert_allclose(integrate_box(est, (0.25,), (0.75,)), 0.75**2 - 0.25**2, rtol=1e-10)

    def test_2d_separable(self):
        grid = GridConfig(lower=(0.0, 0.0), upper=(1.0, 1.0), points_per_dim=(32, 32))
        values = np.ones((32, 32))
        phi = np.zeros((32, 32), dtype=complex)
        phi[16, 16] = 1.0
        est = DensityEstimate(
            grid=grid, values=values, phi_hat=phi,
            filter_mask=np.zeros((32, 32), dtype=bool), pre_clip_mass=1.0, n_samples=10,
        )
        assert_allclose(integrate_box(est, (0.1, 0.2), (0.6, 0.9)), 0.5 * 0.7, rtol=1e-10)
