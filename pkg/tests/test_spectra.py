import numpy as np
import pytest

from src.core.errors import ConfigurationError, DataError
from src.core.spectra import (
    SpectralDataset,
    Spectrum,
    WavelengthGrid,
    resample,
    smooth,
)


class TestWavelengthGrid:
    def test_default_grid_has_501_points(self, grid):
        assert grid.count == 501
        assert grid.wavelengths[0] == 400.0
        assert grid.wavelengths[-1] == 900.0

    def test_count_formula(self):
        assert WavelengthGrid(400, 900, 5).count == 101
        assert WavelengthGrid(350, 2500, 1).count == 2151

    @pytest.mark.parametrize(
        "start,end,step",
        [(900, 400, 1), (400, 400, 1), (400, 900, 0), (400, 900, -1), (400, 900, 3)],
    )
    def test_invalid_grids_rejected(self, start, end, step):
        with pytest.raises(ConfigurationError):
            WavelengthGrid(start, end, step)

    def test_wavelengths_are_read_only(self, grid):
        with pytest.raises(ValueError):
            grid.wavelengths[0] = 0.0

    def test_index_of(self, grid):
        assert grid.index_of(400) == 0
        assert grid.index_of(865) == 465
        assert grid.index_of(900.0) == 500

    def test_index_of_off_grid(self, grid):
        with pytest.raises(ConfigurationError, match="not on the grid"):
            grid.index_of(440.4)
        with pytest.raises(ConfigurationError, match="outside"):
            grid.index_of(950)

    def test_index_of_snaps_on_request(self, grid):
        assert grid.index_of(440.4, snap=True) == 40
        assert grid.index_of(440.6, snap=True) == 41

    def test_equal_grids_compare_equal(self):
        assert WavelengthGrid(400, 900, 1) == WavelengthGrid(400.0, 900.0, 1.0)


class TestSpectrum:
    def test_valid(self, small_grid):
        s = Spectrum(small_grid, [0.0, 0.5, 1.99], label="x")
        assert s.values.tolist() == [0.0, 0.5, 1.99]
        assert not s.values.flags.writeable

    def test_length_mismatch(self, small_grid):
        with pytest.raises(DataError, match="grid expects 3"):
            Spectrum(small_grid, [0.1, 0.2])

    @pytest.mark.parametrize("bad", [[0.1, np.nan, 0.2], [0.1, np.inf, 0.2]])
    def test_non_finite(self, small_grid, bad):
        with pytest.raises(DataError, match="non-finite"):
            Spectrum(small_grid, bad)

    @pytest.mark.parametrize("bad", [[0.1, -0.01, 0.2], [0.1, 2.0, 0.2]])
    def test_out_of_range(self, small_grid, bad):
        with pytest.raises(DataError, match="outside"):
            Spectrum(small_grid, bad)

    def test_at(self, small_grid):
        s = Spectrum(small_grid, [0.1, 0.2, 0.3])
        assert s.at([0, 2]).tolist() == [0.1, 0.3]


class TestSpectralDataset:
    def test_from_matrix(self, tiny_dataset):
        assert tiny_dataset.n == 3
        assert tiny_dataset.labels == ["a", "b", "c"]
        assert tiny_dataset.matrix.shape == (3, 3)
        assert not tiny_dataset.matrix.flags.writeable

    def test_default_labels(self, small_grid):
        ds = SpectralDataset.from_matrix("veg", small_grid, [[0.1] * 3, [0.2] * 3])
        assert ds.labels == ["veg_001", "veg_002"]

    def test_empty_rejected(self, small_grid):
        with pytest.raises(DataError, match="empty"):
            SpectralDataset("none", small_grid, ())

    def test_mixed_grids_rejected(self, small_grid):
        other = WavelengthGrid(400, 404, 2)
        with pytest.raises(DataError, match="grid"):
            SpectralDataset(
                "mixed",
                small_grid,
                (Spectrum(small_grid, [0.1] * 3), Spectrum(other, [0.1] * 3)),
            )

    def test_without(self, tiny_dataset):
        held = tiny_dataset.without(1)
        assert held.labels == ["a", "c"]
        assert tiny_dataset.n == 3

    def test_require_samples(self, tiny_dataset):
        tiny_dataset.require_samples(3, "test")
        with pytest.raises(DataError, match="at least 4"):
            tiny_dataset.require_samples(4, "test")


class TestResample:
    def test_on_grid_is_identity(self, small_grid):
        pairs = [(400.0, 0.1), (401.0, 0.25), (402.0, 0.3)]
        assert resample(pairs, small_grid).values.tolist() == [0.1, 0.25, 0.3]

    def test_linear_midpoint(self):
        grid = WavelengthGrid(400, 402, 1)
        s = resample([(400, 0.1), (402, 0.3)], grid)
        assert s.values[1] == pytest.approx(0.2, abs=1e-15)

    def test_affine_function_reproduced(self, grid):
        raw_w = np.arange(390.0, 911.0, 10.0)
        f = lambda w: 0.2 + 0.0002 * (w - 400)  # noqa: E731
        s = resample(list(zip(raw_w, f(raw_w))), grid)
        np.testing.assert_allclose(s.values, f(grid.wavelengths), rtol=0, atol=1e-14)

    def test_idempotent(self, grid):
        raw_w = np.arange(350.0, 951.0, 7.0)
        raw_v = 0.3 + 0.1 * np.sin(raw_w / 40.0)
        once = resample(list(zip(raw_w, raw_v)), grid)
        twice = resample(list(zip(grid.wavelengths, once.values)), grid)
        assert np.array_equal(once.values, twice.values)

    def test_coverage_gap_names_interval(self, grid):
        pairs = [(410.0, 0.1), (950.0, 0.2)]
        with pytest.raises(DataError, match=r"\[400.0, 410.0\)"):
            resample(pairs, grid)
        pairs = [(350.0, 0.1), (880.0, 0.2)]
        with pytest.raises(DataError, match=r"\(880.0, 900.0\]"):
            resample(pairs, grid)

    @pytest.mark.parametrize(
        "pairs",
        [
            [(400.0, 0.1), (403.0, 0.2), (402.0, 0.3)],
            [(400.0, 0.1), (401.0, 0.2), (401.0, 0.3), (402.0, 0.3)],
        ],
    )
    def test_unsorted_or_duplicate_rejected(self, small_grid, pairs):
        with pytest.raises(DataError, match="strictly ascending"):
            resample(pairs, small_grid)


class TestSmooth:
    def test_constant_unchanged(self, grid):
        s = Spectrum(grid, np.full(grid.count, 0.3))
        assert np.array_equal(smooth(s, 5).values, s.values)

    def test_window_one_is_identity(self, grid, rng):
        s = Spectrum(grid, rng.uniform(0.1, 0.9, grid.count))
        assert np.array_equal(smooth(s, 1).values, s.values)

    def test_three_point_average(self, small_grid):
        s = smooth(Spectrum(small_grid, [0.1, 0.4, 0.1]), 3)
        assert s.values[1] == pytest.approx(0.2, abs=1e-15)
        # truncated windows at both ends
        assert s.values[0] == pytest.approx(0.25, abs=1e-15)
        assert s.values[2] == pytest.approx(0.25, abs=1e-15)

    def test_truncated_window_formula(self, rng):
        grid = WavelengthGrid(400, 410, 1)
        values = rng.uniform(0.1, 0.9, grid.count)
        out = smooth(Spectrum(grid, values), grid.count).values
        half = grid.count // 2
        expected = [values[max(0, i - half) : i + half + 1].mean() for i in range(grid.count)]
        np.testing.assert_allclose(out, expected, rtol=0, atol=1e-12)
        assert out[half] == pytest.approx(values.mean(), abs=1e-12)

    def test_bounded_by_input_range(self, grid, rng):
        values = rng.uniform(0.05, 0.95, grid.count)
        out = smooth(Spectrum(grid, values), 9).values
        assert out.min() >= values.min()
        assert out.max() <= values.max()

    @pytest.mark.parametrize("window", [0, -3, 2, 4, 2.5, True])
    def test_invalid_window(self, small_grid, window):
        with pytest.raises(ConfigurationError):
            smooth(Spectrum(small_grid, [0.1, 0.2, 0.3]), window)

    def test_window_larger_than_grid(self, small_grid):
        with pytest.raises(ConfigurationError, match="exceeds"):
            smooth(Spectrum(small_grid, [0.1, 0.2, 0.3]), 5)
