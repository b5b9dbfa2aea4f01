"""
Linear-combination band model

Predicts reflectance at one target band as a weighted sum of reflectances
at a few reference bands, with weights fit by generalized inverse over a
dataset.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
import yaml

from src.core.errors import ConfigurationError, DataError
from src.core.spectra import SpectralDataset, WavelengthGrid
from src.reconstruct.bands import BandSelection
from src.reconstruct.linalg import RANK_RTOL, pinv_solve

logger = logging.getLogger(__name__)

LINCOMB_FORMAT = "specrecon-lincomb-model"
LINCOMB_VERSION = 1


@dataclass(frozen=True, eq=False)
class LinCombModel:
    source_bands: BandSelection
    target_band: float
    coeffs: NDArray[np.float64]
    rank: int = -1

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if coeffs.size != self.source_bands.k:
            raise ConfigurationError(
                f"{coeffs.size} coefficients for {self.source_bands.k} source bands"
            )
        if float(self.target_band) in self.source_bands.wavelengths_nm:
            raise ConfigurationError(f"Target band {self.target_band} nm is also a source band")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "target_band", float(self.target_band))
        if self.rank < 0:
            object.__setattr__(self, "rank", coeffs.size)

    def predict(self, rho_sources: ArrayLike) -> NDArray[np.float64]:
        """Predictions for one row of source values per sample"""
        rho = np.atleast_2d(np.asarray(rho_sources, dtype=np.float64))
        if rho.shape[1] != self.coeffs.size:
            raise DataError(f"Expected {self.coeffs.size} source values per sample, got {rho.shape[1]}")
        return rho @ self.coeffs


def fit_lincomb(
    ds: SpectralDataset,
    source: BandSelection,
    target_nm: float,
    rtol: float = RANK_RTOL,
) -> LinCombModel:
    """Fit target-band reflectance on the source bands over a dataset"""

    source.check_grid(ds.grid)
    target_index = ds.grid.index_of(target_nm)
    if target_index in source.indices:
        raise ConfigurationError(f"Target band {target_nm} nm is also a source band")
    if ds.n < source.k:
        logger.warning(
            f"Lin-comb fit on '{ds.name}' has {ds.n} samples for {source.k} source bands"
        )

    A = ds.matrix[:, source.index_array]
    zero_columns = [w for w, col in zip(source.wavelengths_nm, A.T) if not np.any(col)]
    if zero_columns:
        raise DataError(f"Source bands {zero_columns} are zero for every sample")

    solution = pinv_solve(A, ds.matrix[:, target_index], rtol=rtol)
    if not solution.full_rank:
        logger.warning(f"Lin-comb design matrix has rank {solution.rank} < {source.k}")
    return LinCombModel(
        source_bands=source,
        target_band=float(ds.grid.wavelengths[target_index]),
        coeffs=solution.x,
        rank=solution.rank,
    )


def apply_lincomb(lc: LinCombModel, rho_sources: ArrayLike) -> float:
    """Target reflectance predicted from one set of source values"""
    rho = np.asarray(rho_sources, dtype=np.float64).reshape(-1)
    if rho.size != lc.coeffs.size:
        raise DataError(f"Expected {lc.coeffs.size} source values, got {rho.size}")
    return float(rho @ lc.coeffs)


def lincomb_to_dict(lc: LinCombModel, grid: WavelengthGrid = None) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "format": LINCOMB_FORMAT,
        "version": LINCOMB_VERSION,
        "source_nm": list(lc.source_bands.wavelengths_nm),
        "target_nm": lc.target_band,
        "coefficients": lc.coeffs.tolist(),
        "rank": lc.rank,
    }
    if grid is not None:
        data["grid"] = {"start_nm": grid.start_nm, "end_nm": grid.end_nm, "step_nm": grid.step_nm}
    return data


def save_lincomb(lc: LinCombModel, path: Union[str, Path], grid: WavelengthGrid = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(lincomb_to_dict(lc, grid), f, sort_keys=False)
    return path


def load_lincomb(path: Union[str, Path]) -> LinCombModel:
    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise DataError(f"{path}: {e}") from e
    if not isinstance(data, dict) or data.get("format") != LINCOMB_FORMAT:
        raise DataError(f"{path}: not a lin-comb model file")

    try:
        grid = WavelengthGrid(**data["grid"]) if "grid" in data else None
        sources = [float(w) for w in data["source_nm"]]
        if grid is not None:
            selection = BandSelection.from_wavelengths(grid, sources)
        else:
            # without a grid the indices only order the coefficients
            selection = BandSelection(tuple(sources), tuple(range(len(sources))))
        return LinCombModel(
            source_bands=selection,
            target_band=float(data["target_nm"]),
            coeffs=np.asarray(data["coefficients"], dtype=np.float64),
            rank=int(data.get("rank", -1)),
        )
    except (KeyError, TypeError) as e:
        raise DataError(f"{path}: incomplete lin-comb model: {e}") from e
