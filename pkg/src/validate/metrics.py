"""
Reconstruction error metrics

Relative error is taken per wavelength and then averaged; wavelengths whose
true reflectance falls below a small floor are excluded and counted.
"""

from typing import Tuple, Union
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.errors import DataError, NumericalError
from src.core.spectra import Spectrum

logger = logging.getLogger(__name__)

RELATIVE_ERROR_FLOOR = 1e-6

SpectrumLike = Union[Spectrum, ArrayLike]


def _pair(truth: SpectrumLike, recon: SpectrumLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    if isinstance(truth, Spectrum) and isinstance(recon, Spectrum) and truth.grid != recon.grid:
        raise DataError(
            f"Cannot compare spectra on different grids: "
            f"{truth.grid.describe()} vs {recon.grid.describe()}"
        )
    t = np.asarray(truth.values if isinstance(truth, Spectrum) else truth, dtype=np.float64)
    r = np.asarray(recon.values if isinstance(recon, Spectrum) else recon, dtype=np.float64)
    if t.shape != r.shape:
        raise DataError(f"Truth and reconstruction differ in shape: {t.shape} vs {r.shape}")
    return t.reshape(-1), r.reshape(-1)


def relative_errors(
    truth: SpectrumLike, recon: SpectrumLike, floor: float = RELATIVE_ERROR_FLOOR
) -> Tuple[NDArray[np.float64], int]:
    """Per-point |recon - truth| / truth, NaN where truth < floor, plus the excluded count"""
    t, r = _pair(truth, recon)
    kept = t >= floor
    errors = np.full(t.shape, np.nan)
    errors[kept] = np.abs(r[kept] - t[kept]) / t[kept]
    return errors, int(t.size - np.count_nonzero(kept))


def mean_relative_error(
    truth: SpectrumLike, recon: SpectrumLike, floor: float = RELATIVE_ERROR_FLOOR
) -> float:
    """Mean over wavelengths of |recon - truth| / truth"""
    errors, excluded = relative_errors(truth, recon, floor)
    if excluded == errors.size:
        raise DataError(f"Every wavelength has true reflectance below {floor}")
    return float(np.nanmean(errors))


def mean_absolute_error(truth: SpectrumLike, recon: SpectrumLike) -> float:
    t, r = _pair(truth, recon)
    return float(np.mean(np.abs(r - t)))


def norm_ratio_error(truth: SpectrumLike, recon: SpectrumLike) -> float:
    """||truth - recon||_2 / ||truth||_2"""
    t, r = _pair(truth, recon)
    norm = np.linalg.norm(t)
    if norm == 0:
        raise DataError("Norm-ratio error of an all-zero spectrum")
    return float(np.linalg.norm(t - r) / norm)


def r_squared(truth_values: ArrayLike, recon_values: ArrayLike) -> float:
    """Squared Pearson correlation of pooled truth and reconstruction values"""

    t, r = _pair(truth_values, recon_values)
    if t.size < 2:
        raise DataError(f"R2 needs at least 2 values, got {t.size}")

    dt = t - t.mean()
    dr = r - r.mean()
    var_t = float(dt @ dt)
    var_r = float(dr @ dr)
    if var_t == 0:
        raise NumericalError("R2 is undefined: true values have zero variance")
    if var_r == 0:
        return 0.0
    cov = float(dt @ dr)
    return min(1.0, cov * cov / (var_t * var_r))
