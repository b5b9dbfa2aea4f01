from dataclasses import dataclass
from typing import Sequence, Tuple
import logging

import numpy as np
from numpy.typing import NDArray

from src.core.errors import ConfigurationError
from src.core.spectra import GRID_TOLERANCE_NM, WavelengthGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandSelection:
    """Ordered on-grid wavelengths used for partial-information solves"""

    wavelengths_nm: Tuple[float, ...]
    indices: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.wavelengths_nm:
            raise ConfigurationError("Band selection is empty")
        if len(self.wavelengths_nm) != len(self.indices):
            raise ConfigurationError("Band wavelengths and indices differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ConfigurationError(
                f"Bands must be distinct and strictly increasing: {list(self.wavelengths_nm)}"
            )

    @classmethod
    def from_wavelengths(
        cls, grid: WavelengthGrid, wavelengths_nm: Sequence[float], snap: bool = False
    ) -> "BandSelection":
        """Locate bands on the grid; off-grid bands are rejected unless snap"""

        wavelengths_nm = list(wavelengths_nm)
        indices = [grid.index_of(w, snap=snap) for w in wavelengths_nm]
        sel = cls(
            wavelengths_nm=tuple(float(grid.wavelengths[i]) for i in indices),
            indices=tuple(indices),
        )
        if snap:
            for requested, placed, distance in zip(
                wavelengths_nm, sel.wavelengths_nm, sel.snap_distances(wavelengths_nm)
            ):
                if distance > GRID_TOLERANCE_NM:
                    logger.warning(
                        f"Snapped band {requested} nm to {placed:g} nm (distance {distance:g} nm)"
                    )
        return sel

    @classmethod
    def full(cls, grid: WavelengthGrid) -> "BandSelection":
        """Every grid point"""
        return cls(
            wavelengths_nm=tuple(float(w) for w in grid.wavelengths),
            indices=tuple(range(grid.count)),
        )

    @property
    def k(self) -> int:
        return len(self.indices)

    @property
    def index_array(self) -> NDArray[np.intp]:
        return np.asarray(self.indices, dtype=np.intp)

    def covers(self, grid: WavelengthGrid) -> bool:
        """True when the selection is the whole grid"""
        return self.k == grid.count and self.indices == tuple(range(grid.count))

    def check_grid(self, grid: WavelengthGrid) -> None:
        if self.indices[-1] >= grid.count or any(
            abs(grid.wavelengths[i] - w) > GRID_TOLERANCE_NM for i, w in zip(self.indices, self.wavelengths_nm)
        ):
            raise ConfigurationError(
                f"Band selection {list(self.wavelengths_nm)} does not match grid {grid.describe()}"
            )

    def snap_distances(self, requested_nm: Sequence[float]) -> list[float]:
        return [abs(a - float(b)) for a, b in zip(self.wavelengths_nm, requested_nm)]
