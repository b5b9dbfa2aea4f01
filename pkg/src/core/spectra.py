"""
Spectral core types

Wavelength grid, spectrum and dataset types shared by every other package,
plus resampling and smoothing of raw measurements onto the working grid.
All types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from src.core.errors import ConfigurationError, DataError

logger = logging.getLogger(__name__)

REFLECTANCE_MIN = 0.0
REFLECTANCE_MAX = 2.0  # exclusive
GRID_TOLERANCE_NM = 1e-9

DEFAULT_START_NM = 400.0
DEFAULT_END_NM = 900.0
DEFAULT_STEP_NM = 1.0


def _readonly(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform wavelength grid in nm, both ends inclusive"""

    start_nm: float = DEFAULT_START_NM
    end_nm: float = DEFAULT_END_NM
    step_nm: float = DEFAULT_STEP_NM

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_nm", float(self.start_nm))
        object.__setattr__(self, "end_nm", float(self.end_nm))
        object.__setattr__(self, "step_nm", float(self.step_nm))

        if not self.step_nm > 0:
            raise ConfigurationError(f"Grid step must be positive, got {self.step_nm}")
        if not self.start_nm < self.end_nm:
            raise ConfigurationError(
                f"Grid start {self.start_nm} nm must be below end {self.end_nm} nm"
            )
        intervals = (self.end_nm - self.start_nm) / self.step_nm
        if abs(intervals - round(intervals)) > 1e-9 * max(1.0, intervals):
            raise ConfigurationError(
                f"Grid end {self.end_nm} nm is not reachable from {self.start_nm} nm "
                f"in steps of {self.step_nm} nm"
            )

    @property
    def count(self) -> int:
        return int(round((self.end_nm - self.start_nm) / self.step_nm)) + 1

    @cached_property
    def wavelengths(self) -> NDArray[np.float64]:
        """Grid wavelengths in nm"""
        return _readonly(self.start_nm + self.step_nm * np.arange(self.count))

    def index_of(self, wavelength_nm: float, snap: bool = False) -> int:
        """Grid index of a wavelength; off-grid values are rejected unless snap"""
        position = (float(wavelength_nm) - self.start_nm) / self.step_nm
        index = int(round(position))
        if index < 0 or index >= self.count:
            raise ConfigurationError(
                f"Wavelength {wavelength_nm} nm is outside the grid "
                f"[{self.start_nm}, {self.end_nm}] nm"
            )
        if not snap and abs(self.wavelengths[index] - wavelength_nm) > GRID_TOLERANCE_NM:
            raise ConfigurationError(
                f"Wavelength {wavelength_nm} nm is not on the grid "
                f"(nearest grid point {self.wavelengths[index]} nm)"
            )
        return index

    def describe(self) -> str:
        return f"{self.start_nm:g}-{self.end_nm:g} nm @ {self.step_nm:g} nm ({self.count} points)"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Reflectance values on a wavelength grid

    Measured spectra must lie in [0, 2). Model outputs (reconstructions) are
    built with check_range=False and may leave that interval.
    """

    grid: WavelengthGrid
    values: NDArray[np.float64]
    label: str = ""
    check_range: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        if values.ndim != 1 or values.shape[0] != self.grid.count:
            raise DataError(
                f"Spectrum '{self.label}' has {values.size} values, "
                f"grid expects {self.grid.count}"
            )
        if not np.all(np.isfinite(values)):
            raise DataError(f"Spectrum '{self.label}' contains non-finite values")
        low, high = float(values.min()), float(values.max())
        if self.check_range and (low < REFLECTANCE_MIN or high >= REFLECTANCE_MAX):
            raise DataError(
                f"Spectrum '{self.label}' reflectance range [{low:.6g}, {high:.6g}] "
                f"is outside [{REFLECTANCE_MIN}, {REFLECTANCE_MAX})"
            )
        object.__setattr__(self, "values", values)

    @property
    def wavelengths(self) -> NDArray[np.float64]:
        return self.grid.wavelengths

    def at(self, indices: Sequence[int]) -> NDArray[np.float64]:
        """Values at the given grid indices"""
        return self.values[np.asarray(indices, dtype=int)]


@dataclass(frozen=True, eq=False)
class SpectralDataset:
    """Named collection of spectra of one surface class on a shared grid"""

    name: str
    grid: WavelengthGrid
    spectra: Tuple[Spectrum, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        spectra = tuple(self.spectra)
        if not spectra:
            raise DataError(f"Dataset '{self.name}' is empty")
        for spectrum in spectra:
            if spectrum.grid != self.grid:
                raise DataError(
                    f"Spectrum '{spectrum.label}' is on grid {spectrum.grid.describe()}, "
                    f"dataset '{self.name}' uses {self.grid.describe()}"
                )
        object.__setattr__(self, "spectra", spectra)

    @classmethod
    def from_matrix(
        cls,
        name: str,
        grid: WavelengthGrid,
        matrix: ArrayLike,
        labels: Optional[Sequence[str]] = None,
    ) -> "SpectralDataset":
        """Build a dataset from an n x d matrix, one spectrum per row"""
        rows = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        if labels is None:
            labels = [f"{name}_{i + 1:03d}" for i in range(rows.shape[0])]
        if len(labels) != rows.shape[0]:
            raise DataError(f"{len(labels)} labels for {rows.shape[0]} spectra")
        return cls(
            name=name,
            grid=grid,
            spectra=tuple(
                Spectrum(grid=grid, values=row, label=label)
                for row, label in zip(rows, labels)
            ),
        )

    @property
    def n(self) -> int:
        return len(self.spectra)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.spectra]

    @cached_property
    def matrix(self) -> NDArray[np.float64]:
        """Sample matrix S, one spectrum per row (n x d)"""
        return _readonly(np.vstack([s.values for s in self.spectra]))

    def subset(self, indices: Iterable[int]) -> "SpectralDataset":
        return SpectralDataset(
            name=self.name,
            grid=self.grid,
            spectra=tuple(self.spectra[i] for i in indices),
        )

    def without(self, index: int) -> "SpectralDataset":
        """Dataset with one sample held out"""
        return self.subset(i for i in range(self.n) if i != index)

    def require_samples(self, minimum: int, purpose: str) -> None:
        if self.n < minimum:
            raise DataError(
                f"{purpose} needs at least {minimum} spectra, "
                f"dataset '{self.name}' has {self.n}"
            )


def default_grid() -> WavelengthGrid:
    """Working grid of the toolkit: 400-900 nm at 1 nm (501 points)"""
    return WavelengthGrid(DEFAULT_START_NM, DEFAULT_END_NM, DEFAULT_STEP_NM)


def resample(
    raw_pairs: Sequence[Tuple[float, float]],
    target: WavelengthGrid,
    label: str = "",
) -> Spectrum:
    """Piecewise-linear resampling of (wavelength, reflectance) pairs onto a grid"""

    if len(raw_pairs) == 0:
        raise DataError("No raw samples to resample")
    raw = np.asarray(raw_pairs, dtype=np.float64).reshape(-1, 2)
    wavelengths, values = raw[:, 0], raw[:, 1]

    steps = np.diff(wavelengths)
    if np.any(steps <= 0):
        bad = int(np.argmax(steps <= 0))
        raise DataError(
            f"Raw wavelengths must be strictly ascending: "
            f"{wavelengths[bad]} nm followed by {wavelengths[bad + 1]} nm"
        )

    low, high = float(wavelengths[0]), float(wavelengths[-1])
    if low > target.start_nm:
        raise DataError(
            f"Raw data does not cover [{target.start_nm}, {low}) nm "
            f"of the target grid {target.describe()}"
        )
    if high < target.end_nm:
        raise DataError(
            f"Raw data does not cover ({high}, {target.end_nm}] nm "
            f"of the target grid {target.describe()}"
        )

    resampled = np.interp(target.wavelengths, wavelengths, values)
    return Spectrum(grid=target, values=resampled, label=label)


def smooth(s: Spectrum, window: int) -> Spectrum:
    """Centered boxcar moving average, truncated at the grid boundaries"""

    if isinstance(window, bool) or int(window) != window or window < 1 or window % 2 == 0:
        raise ConfigurationError(f"Smoothing window must be an odd integer >= 1, got {window}")
    window = int(window)
    if window > s.grid.count:
        raise ConfigurationError(
            f"Smoothing window {window} exceeds the grid size {s.grid.count}"
        )
    if window == 1:
        return Spectrum(grid=s.grid, values=s.values, label=s.label, check_range=s.check_range)

    # min_periods=1 shrinks the window at both ends of the grid
    rolled = pd.Series(s.values).rolling(window, min_periods=1, center=True).mean()
    # an average never leaves the input range
    averaged = np.clip(rolled.to_numpy(), s.values.min(), s.values.max())
    return Spectrum(grid=s.grid, values=averaged, label=s.label, check_range=s.check_range)
