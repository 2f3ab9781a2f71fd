import numpy as np
import pytest

from oracles import quad_model_mse

from aciq.distributions import LAPLACE, DistributionModel, sample
from aciq.quantizer import (
    SYMMETRIC,
    UNSIGNED,
    ChannelTensor,
    clip,
    empirical_mse,
    make_grid,
    make_grid_levels,
    quantize,
    quantize_minmax_channel,
)


class TestGrid:
    def test_symmetric_two_bits(self):
        grid = make_grid(1.0, 2, SYMMETRIC)
        assert grid.delta == 0.5
        np.testing.assert_allclose(grid.midpoints, [-0.75, -0.25, 0.25, 0.75])

    def test_unsigned_one_bit(self):
        grid = make_grid(1.0, 1, UNSIGNED)
        assert grid.delta == 0.5
        np.testing.assert_allclose(grid.midpoints, [0.25, 0.75])

    def test_step_at_optimal_clipping(self):
        grid = make_grid(5.03, 4, SYMMETRIC)
        assert grid.delta == pytest.approx(2 * 5.03 / 16, rel=1e-15)

    @pytest.mark.parametrize("bits", [1, 3, 8])
    @pytest.mark.parametrize("mode", [SYMMETRIC, UNSIGNED])
    def test_invariants(self, bits, mode):
        alpha = 2.5
        grid = make_grid(alpha, bits, mode)
        assert grid.midpoints.size == 2**bits
        assert np.all(np.diff(grid.midpoints) > 0)
        assert grid.midpoints[0] > grid.low
        assert grid.midpoints[-1] < alpha
        expected = grid.low + (2 * np.arange(2**bits) + 1) * grid.delta / 2
        np.testing.assert_allclose(grid.midpoints, expected)

    def test_arbitrary_level_count(self):
        grid = make_grid_levels(1.0, 3, SYMMETRIC)
        assert grid.n_levels == 3
        assert grid.bits is None
        np.testing.assert_allclose(grid.midpoints, [-2 / 3, 0.0, 2 / 3])

    def test_validation(self):
        with pytest.raises(ValueError):
            make_grid(1.0, 0)
        with pytest.raises(ValueError):
            make_grid(1.0, 17)
        with pytest.raises(ValueError):
            make_grid(0.0, 4)
        with pytest.raises(ValueError):
            make_grid_levels(1.0, 4, "diagonal")


class TestClip:
    def test_pass_through(self):
        assert clip(0.5, 1.0) == 0.5

    def test_saturates(self):
        assert clip(-3.0, 1.0) == -1.0

    def test_boundary_passes(self):
        assert clip(1.0, 1.0) == 1.0

    def test_idempotent(self):
        x = np.linspace(-10, 10, 1001)
        np.testing.assert_array_equal(clip(clip(x, 2.0), 2.0), clip(x, 2.0))

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            clip(1.0, 0.0)


class TestQuantize:
    def test_midpoint_rounding(self):
        grid = make_grid(1.0, 2, SYMMETRIC)
        assert quantize(0.3, grid) == 0.25

    def test_saturated_to_top_midpoint(self):
        grid = make_grid(1.0, 2, SYMMETRIC)
        assert quantize(99.0, grid) == 0.75

    def test_tie_goes_to_upper_bin(self):
        grid = make_grid(1.0, 2, SYMMETRIC)
        assert quantize(-0.5, grid) == -0.25

    def test_interior_edges_by_enumeration(self):
        # Every interior bin edge must land in the bin above it; the top of
        # the range belongs to the last bin.
        grid = make_grid(2.0, 3, SYMMETRIC)
        edges = grid.low + grid.delta * np.arange(1, grid.n_levels)
        for k, edge in enumerate(edges):
            assert quantize(edge, grid) == pytest.approx(grid.midpoints[k + 1])
        assert quantize(2.0, grid) == pytest.approx(grid.midpoints[-1])

    def test_output_is_a_midpoint(self):
        grid = make_grid(1.5, 4, SYMMETRIC)
        x = np.random.default_rng(0).uniform(-4, 4, 1000)
        q = quantize(x, grid)
        assert np.isin(np.round(q, 12), np.round(grid.midpoints, 12)).all()

    def test_idempotent(self):
        grid = make_grid(1.5, 3, SYMMETRIC)
        x = np.random.default_rng(1).uniform(-4, 4, 1000)
        q = quantize(x, grid)
        np.testing.assert_array_equal(quantize(q, grid), q)

    def test_bounded_by_top_midpoint(self):
        grid = make_grid(2.0, 3, SYMMETRIC)
        x = np.random.default_rng(2).uniform(-10, 10, 1000)
        assert np.abs(quantize(x, grid)).max() <= grid.alpha - grid.delta / 2 + 1e-12

    def test_in_range_error_bound(self):
        grid = make_grid(2.0, 5, SYMMETRIC)
        x = np.random.default_rng(3).uniform(-2, 2, 1000)
        assert np.abs(x - quantize(x, grid)).max() <= grid.delta / 2 + 1e-12


class TestMinMaxBaseline:
    def test_endpoints_representable(self):
        q, scale, offset = quantize_minmax_channel([0.0, 1.0], 1)
        np.testing.assert_array_equal(q, [0.0, 1.0])
        assert scale == 1.0
        assert offset == 0.0

    def test_constant_channel(self):
        q, scale, offset = quantize_minmax_channel([0.0, 0.0, 0.0], 4)
        np.testing.assert_array_equal(q, [0.0, 0.0, 0.0])
        assert scale == 0.0
        assert offset == 0.0

    def test_four_level_lattice(self):
        x = np.round(np.arange(0, 1.05, 0.1), 10)
        q, scale, offset = quantize_minmax_channel(x, 2)
        lattice = offset + scale * np.arange(4)
        assert np.isin(np.round(q, 12), np.round(lattice, 12)).all()
        assert np.abs(x - q).max() <= (1 / 3) / 2 + 1e-12

    def test_reconstruction_is_affine(self):
        x = np.random.default_rng(5).standard_normal(257)
        q, scale, offset = quantize_minmax_channel(x, 4)
        codes = (q - offset) / scale
        np.testing.assert_allclose(codes, np.round(codes), atol=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            quantize_minmax_channel([], 4)

    @pytest.mark.parametrize("seed", range(5))
    def test_high_bit_dominance(self, seed):
        # At 12 bits the lattice is fine enough that the error is a
        # vanishing fraction of any non-constant channel's variance.
        rng = np.random.default_rng(seed)
        kind = seed % 3
        if kind == 0:
            x = rng.standard_normal(10000)
        elif kind == 1:
            x = rng.laplace(size=10000)
        else:
            x = np.concatenate([rng.uniform(-1, 1, 9999), [25.0]])
        q, _, _ = quantize_minmax_channel(x, 12)
        assert np.mean((x - q) ** 2) <= 1e-4 * x.var()


class TestEmpiricalMse:
    def test_zero_at_midpoints(self):
        grid = make_grid(1.0, 3, SYMMETRIC)
        assert empirical_mse(np.repeat(grid.midpoints, 3), grid) == 0.0

    def test_all_clipped(self):
        grid = make_grid(1.0, 2, SYMMETRIC)
        samples = np.full(10, 11.0)
        assert empirical_mse(samples, grid) == pytest.approx(105.0625, rel=1e-12)

    def test_matches_quadrature_oracle(self):
        # The deployed map sends saturated values to the top bin midpoint;
        # the quadrature oracle integrates exactly that map.
        model = DistributionModel(LAPLACE, 1.0)
        x = sample(model, 100000, seed=9)
        grid = make_grid(5.03, 4, SYMMETRIC)
        expected = quad_model_mse(model, 5.03, 16, "symmetric", tail="midpoint")
        assert empirical_mse(x, grid) == pytest.approx(expected, rel=0.08)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_mse([], make_grid(1.0, 2))


class TestChannelTensor:
    def test_round_trip_through_array(self):
        rng = np.random.default_rng(0)
        arr = rng.standard_normal((3, 4, 5))
        tensor = ChannelTensor.from_array(arr, channel_axis=1)
        assert tensor.n_channels == 4
        np.testing.assert_array_equal(tensor.to_array(), arr)

    def test_channels_view_is_channel_major(self):
        arr = np.arange(24.0).reshape(2, 3, 4)
        tensor = ChannelTensor.from_array(arr, channel_axis=1)
        np.testing.assert_array_equal(tensor.channels()[0], arr[:, 0, :].ravel())

    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelTensor((2, 3), 0, np.zeros(5))
        with pytest.raises(ValueError):
            ChannelTensor((2, 3), 2, np.zeros(6))
        with pytest.raises(ValueError):
            ChannelTensor((), 0, np.zeros(1))
