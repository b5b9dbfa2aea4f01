import numpy as np
import pytest

from src.core.errors import ConfigurationError, DataError, NumericalError
from src.core.spectra import SpectralDataset, Spectrum, WavelengthGrid
from src.pca.engine import fit
from src.pca.model import Centering
from src.reconstruct.bands import BandSelection
from src.reconstruct.lincomb import fit_lincomb
from src.reconstruct.spectral import project, reconstruct_array
from src.validate.loocv import (
    evaluate_in_sample,
    loocv_bands,
    loocv_full,
    loocv_lincomb,
    sweep_components,
)
from src.validate.metrics import (
    mean_absolute_error,
    mean_relative_error,
    norm_ratio_error,
    r_squared,
    relative_errors,
)
from src.validate.report import ProtocolDescriptor, build_report


@pytest.fixture
def three_samples():
    """Three 2-band spectra whose holdout reconstructions work out by hand"""
    grid = WavelengthGrid(400, 401, 1)
    return SpectralDataset.from_matrix(
        "hand", grid, [[0.1, 0.1], [0.3, 0.3], [0.2, 0.4]], labels=["a", "b", "c"]
    )


@pytest.fixture
def medium_dataset(rng, make_random_dataset):
    return make_random_dataset(rng, 10, 30)


class TestMetrics:
    def test_identical_is_zero(self, rng):
        t = rng.uniform(0.1, 0.9, 50)
        assert mean_relative_error(t, t) == 0.0
        assert mean_absolute_error(t, t) == 0.0
        assert norm_ratio_error(t, t) == 0.0

    def test_five_percent(self):
        assert mean_relative_error(np.full(10, 0.2), np.full(10, 0.21)) == pytest.approx(0.05, abs=1e-14)

    def test_matches_loop_oracle(self, rng):
        t = rng.uniform(0.01, 0.9, 200)
        r = t + rng.normal(scale=0.01, size=200)
        expected = sum(abs(r[i] - t[i]) / t[i] for i in range(200)) / 200
        assert mean_relative_error(t, r) == pytest.approx(expected, abs=1e-14)

    def test_spectra_accepted(self, small_grid):
        t = Spectrum(small_grid, [0.1, 0.2, 0.4])
        r = Spectrum(small_grid, [0.11, 0.2, 0.4])
        assert mean_relative_error(t, r) == pytest.approx(0.1 / 3, abs=1e-14)

    def test_grid_mismatch(self, small_grid):
        other = WavelengthGrid(500, 502, 1)
        with pytest.raises(DataError, match="different grids"):
            mean_relative_error(Spectrum(small_grid, [0.1] * 3), Spectrum(other, [0.1] * 3))

    def test_floor_excludes_and_counts(self):
        errors, excluded = relative_errors([0.0, 1e-7, 0.2], [0.1, 0.1, 0.3])
        assert excluded == 2
        assert np.isnan(errors[0]) and np.isnan(errors[1])
        assert errors[2] == pytest.approx(0.5)
        assert mean_relative_error([0.0, 1e-7, 0.2], [0.1, 0.1, 0.3]) == pytest.approx(0.5)

    def test_all_excluded(self):
        with pytest.raises(DataError, match="below"):
            mean_relative_error([0.0, 0.0], [0.1, 0.1])

    def test_r_squared_identity_and_affine(self, rng):
        t = rng.uniform(0.1, 0.9, 100)
        assert r_squared(t, t) == 1.0
        assert r_squared(t, 2 * t + 0.1) == pytest.approx(1.0, abs=1e-12)

    def test_r_squared_matches_covariance_formula(self, rng):
        t = rng.uniform(0.1, 0.9, 300)
        r = t + rng.normal(scale=0.05, size=300)
        expected = np.corrcoef(t, r)[0, 1] ** 2
        assert r_squared(t, r) == pytest.approx(expected, abs=1e-12)

    def test_r_squared_degenerate(self):
        with pytest.raises(NumericalError, match="zero variance"):
            r_squared([0.5, 0.5, 0.5], [0.1, 0.2, 0.3])
        with pytest.raises(DataError):
            r_squared([0.2], [0.2])
        assert r_squared([0.1, 0.2, 0.3], [0.25, 0.25, 0.25]) == 0.0


class TestBuildReport:
    def test_invariants(self, rng):
        t = rng.uniform(0.1, 0.9, size=(4, 20))
        r = t + rng.normal(scale=0.02, size=(4, 20))
        report = build_report(
            ProtocolDescriptor("full", "x", 4, components=2), list("abcd"), np.arange(20.0), t, r
        )
        assert 0 <= report.r_squared <= 1
        assert np.all(report.relative_errors >= 0)
        assert report.residuals.shape == (4, 20)
        np.testing.assert_array_equal(report.residuals, t - r)
        assert report.mean_relative_error == pytest.approx(report.relative_errors.mean())
        np.testing.assert_array_equal(report.mean_truth(), t.mean(axis=0))

    def test_sample_with_no_usable_wavelength(self):
        t = np.array([[0.1, 0.2], [0.0, 0.0], [0.3, 0.1]])
        with pytest.raises(DataError, match="'b'"):
            build_report(ProtocolDescriptor("full", "x", 3), ["a", "b", "c"], [400.0, 401.0], t, t)

    def test_scalar_rows_exclude_small_truth(self):
        t = np.array([[0.1], [0.0], [0.3]])
        r = np.array([[0.11], [0.01], [0.3]])
        report = build_report(ProtocolDescriptor("lincomb", "x", 3), ["a", "b", "c"], [440.0], t, r)
        assert report.total_excluded == 1
        assert np.isnan(report.relative_errors[1])
        assert report.mean_relative_error == pytest.approx(0.05)
        assert np.all(np.isnan(report.sample_r_squared))


class TestLoocvFull:
    def test_hand_fixture(self, three_samples):
        report = loocv_full(three_samples, 1)
        np.testing.assert_allclose(report.recon, [[0.3, 0.3], [0.18, 0.34], [0.3, 0.3]], atol=1e-12)
        np.testing.assert_allclose(report.relative_errors, [2.0, 0.8 / 3, 0.375], atol=1e-12)
        np.testing.assert_allclose(report.absolute_errors, [0.2, 0.08, 0.1], atol=1e-12)
        assert report.mean_relative_error == pytest.approx((2.0 + 0.8 / 3 + 0.375) / 3, abs=1e-12)
        assert report.protocol.mode == "full"
        assert report.labels == ("a", "b", "c")

    def test_in_span_holdouts_exact(self, low_rank_dataset):
        report = loocv_full(low_rank_dataset, 3)
        assert np.max(report.relative_errors) <= 1e-8

    def test_full_dimension_exact(self, medium_dataset):
        report = loocv_full(medium_dataset, medium_dataset.grid.count)
        assert np.max(np.abs(report.residuals)) <= 1e-10

    def test_no_cross_sample_leakage(self, medium_dataset):
        report = loocv_full(medium_dataset, 4)
        for i in (0, 5, 9):
            model = fit(medium_dataset.without(i))
            recon = reconstruct_array(model, project(model, medium_dataset.spectra[i], 4))
            assert report.relative_errors[i] == mean_relative_error(medium_dataset.matrix[i], recon)

    def test_parallel_is_bitwise_identical(self, medium_dataset):
        serial = loocv_full(medium_dataset, 3, workers=1)
        parallel = loocv_full(medium_dataset, 3, workers=4)
        assert np.array_equal(serial.recon, parallel.recon)
        assert serial.mean_relative_error == parallel.mean_relative_error
        assert serial.r_squared == parallel.r_squared

    def test_needs_three_samples(self, tiny_dataset):
        with pytest.raises(DataError, match="at least 3"):
            loocv_full(tiny_dataset.subset([0, 1]), 1)

    def test_component_bounds(self, tiny_dataset):
        with pytest.raises(ConfigurationError):
            loocv_full(tiny_dataset, 4)


class TestLoocvBands:
    @pytest.mark.parametrize("centering", list(Centering))
    def test_full_grid_equals_full_band(self, medium_dataset, centering):
        sel = BandSelection.full(medium_dataset.grid)
        full = loocv_full(medium_dataset, 5, centering)
        bands = loocv_bands(medium_dataset, sel, 5, centering)
        assert full.protocol.centering == bands.protocol.centering
        assert np.array_equal(full.recon, bands.recon)
        assert np.array_equal(full.relative_errors, bands.relative_errors)
        assert full.mean_relative_error == bands.mean_relative_error
        assert full.r_squared == bands.r_squared

    def test_uncentered_solves_raw_band_values(self, medium_dataset):
        ds = medium_dataset
        sel = BandSelection.from_wavelengths(ds.grid, ds.grid.wavelengths[[2, 9, 17, 25, 28]])
        report = loocv_bands(ds, sel, 3, Centering.UNCENTERED)
        idx = sel.index_array
        for i in (0, ds.n - 1):
            model = fit(ds.without(i), Centering.UNCENTERED)
            w = np.linalg.lstsq(model.components[idx, :3], ds.matrix[i, idx], rcond=None)[0]
            np.testing.assert_allclose(report.recon[i], model.components[:, :3] @ w, atol=1e-10)

    def test_under_determined_rejected(self, medium_dataset):
        sel = BandSelection.from_wavelengths(medium_dataset.grid, [405, 410, 415])
        with pytest.raises(ConfigurationError, match="Under-determined"):
            loocv_bands(medium_dataset, sel, 4)

    def test_in_span_recovered_from_bands(self, low_rank_dataset):
        sel = BandSelection.from_wavelengths(low_rank_dataset.grid, [440, 555, 670, 865])
        report = loocv_bands(low_rank_dataset, sel, 3)
        assert np.max(report.relative_errors) <= 1e-8
        assert report.protocol.bands_nm == (440.0, 555.0, 670.0, 865.0)
        assert report.rank_deficient == 0


class TestLoocvLincomb:
    @pytest.fixture
    def dependent(self, grid, rng):
        matrix = rng.uniform(0.05, 0.6, size=(15, grid.count))
        matrix[:, 40] = 0.7 * matrix[:, 90] + 0.2 * matrix[:, 155] + 0.1 * matrix[:, 465]
        return SpectralDataset.from_matrix("dependent", grid, matrix)

    def test_exact_dependence(self, dependent, grid):
        source = BandSelection.from_wavelengths(grid, [490, 555, 670, 865])
        report = loocv_lincomb(dependent, source, 440)
        assert np.max(report.relative_errors) <= 1e-8
        assert np.max(report.absolute_errors) <= 1e-8
        assert report.r_squared == pytest.approx(1.0, abs=1e-12)
        assert report.residuals.shape == (15, 1)
        np.testing.assert_allclose(report.lincomb.coeffs, [0.7, 0.2, 0.0, 0.1], atol=1e-8)

    def test_reports_full_dataset_fit(self, sample_datasets, grid):
        ds = sample_datasets["concrete"]
        source = BandSelection.from_wavelengths(grid, [490, 555, 670, 865])
        report = loocv_lincomb(ds, source, 810)
        full_fit = fit_lincomb(ds, source, 810)
        assert np.array_equal(report.lincomb.coeffs, full_fit.coeffs)
        assert report.protocol.target_nm == 810.0
        assert report.wavelengths_nm.tolist() == [810.0]

    def test_needs_more_samples_than_bands(self, dependent, grid):
        source = BandSelection.from_wavelengths(grid, [490, 555, 670, 865])
        with pytest.raises(DataError, match="at least 5"):
            loocv_lincomb(dependent.subset(range(4)), source, 440)

    def test_target_in_source(self, dependent, grid):
        source = BandSelection.from_wavelengths(grid, [490, 555, 670, 865])
        with pytest.raises(ConfigurationError):
            loocv_lincomb(dependent, source, 670)


class TestSweepAndInSample:
    def test_sweep_matches_single_runs(self, medium_dataset):
        reports = sweep_components(medium_dataset, [1, 3, 5], workers=2)
        assert [r.protocol.components for r in reports] == [1, 3, 5]
        for report, m in zip(reports, [1, 3, 5]):
            single = loocv_full(medium_dataset, m)
            assert np.array_equal(report.recon, single.recon)

    def test_sweep_needs_values(self, medium_dataset):
        with pytest.raises(ConfigurationError):
            sweep_components(medium_dataset, [])

    def test_in_sample_error_nonincreasing(self, medium_dataset):
        errors = [evaluate_in_sample(medium_dataset, m).mean_norm_ratio_error for m in range(1, 11)]
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))

    def test_in_sample_exact_at_rank(self, medium_dataset):
        # n = 10 spectra span a 9-dimensional affine subspace
        report = evaluate_in_sample(medium_dataset, 9)
        assert np.max(np.abs(report.residuals)) <= 1e-10
        assert report.protocol.mode == "in-sample"
