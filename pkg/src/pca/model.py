"""
PCA model

Mean vector, descending eigenvalues and the orthonormal component matrix of
one dataset, plus a versioned YAML file format that reads back bit-for-bit.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union
import logging

import numpy as np
from numpy.typing import NDArray
import yaml

from src.core.errors import ConfigurationError, DataError, NumericalError
from src.core.spectra import Spectrum, WavelengthGrid

logger = logging.getLogger(__name__)

MODEL_FORMAT = "specrecon-pca-model"
MODEL_VERSION = 1
ORTHONORMALITY_TOLERANCE = 1e-10


class Centering(str, Enum):
    """Whether projection and reconstruction work around the dataset mean"""

    CENTERED = "centered"
    UNCENTERED = "uncentered"

    @classmethod
    def _missing_(cls, value: object) -> Optional["Centering"]:
        return CENTERING_ALIASES.get(value) if isinstance(value, str) else None


# alternative spellings accepted wherever a centering value is parsed
CENTERING_ALIASES = {"paper-literal": Centering.UNCENTERED}


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Principal components of one dataset"""

    grid: WavelengthGrid
    mean: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    components: NDArray[np.float64]  # d x d, one PC per column
    centering: Centering = Centering.CENTERED

    def __post_init__(self) -> None:
        d = self.grid.count
        mean = np.array(self.mean, dtype=np.float64)
        eigenvalues = np.array(self.eigenvalues, dtype=np.float64)
        components = np.array(self.components, dtype=np.float64)

        if mean.shape != (d,) or eigenvalues.shape != (d,) or components.shape != (d, d):
            raise DataError(
                f"Model arrays do not match grid of {d} points: mean {mean.shape}, "
                f"eigenvalues {eigenvalues.shape}, components {components.shape}"
            )
        if np.any(np.diff(eigenvalues) > 0):
            raise NumericalError("Model eigenvalues must be nonincreasing")

        gram_error = np.max(np.abs(components.T @ components - np.eye(d)))
        if gram_error > ORTHONORMALITY_TOLERANCE:
            raise NumericalError(
                f"Model components are not orthonormal (max |P'P - I| = {gram_error:.3g})"
            )

        for name, arr in (("mean", mean), ("eigenvalues", eigenvalues), ("components", components)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "centering", Centering(self.centering))

    @property
    def d(self) -> int:
        return self.grid.count

    @property
    def centered(self) -> bool:
        return self.centering is Centering.CENTERED

    def basis(self, m: int) -> NDArray[np.float64]:
        """First m principal components as columns (d x m)"""
        self.check_components(m)
        return self.components[:, :m]

    def check_components(self, m: int) -> None:
        if isinstance(m, bool) or int(m) != m or not 1 <= m <= self.d:
            raise ConfigurationError(f"Number of components must be in [1, {self.d}], got {m}")

    def check_spectrum(self, r: Spectrum) -> None:
        if r.grid != self.grid:
            raise DataError(
                f"Spectrum '{r.label}' is on {r.grid.describe()}, "
                f"model expects {self.grid.describe()}"
            )


def _encode(values: NDArray[np.float64]) -> str:
    # repr() is the shortest string that parses back to the same double
    return " ".join(repr(v) for v in values.tolist())


def _decode(text: str, expected: int, field: str) -> NDArray[np.float64]:
    values = np.array([float(v) for v in str(text).split()], dtype=np.float64)
    if values.size != expected:
        raise DataError(f"Model field '{field}' has {values.size} values, expected {expected}")
    return values


def model_to_dict(model: PcaModel) -> Dict[str, Any]:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "grid": {
            "start_nm": model.grid.start_nm,
            "end_nm": model.grid.end_nm,
            "step_nm": model.grid.step_nm,
        },
        "centering": model.centering.value,
        "dimension": model.d,
        "mean": _encode(model.mean),
        "eigenvalues": _encode(model.eigenvalues),
        # column-major: one entry per principal component
        "components": [_encode(model.components[:, j]) for j in range(model.d)],
    }


def model_from_dict(data: Dict[str, Any]) -> PcaModel:
    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise DataError("Not a PCA model file")
    if data.get("version") != MODEL_VERSION:
        raise DataError(f"Unsupported model file version {data.get('version')}")

    try:
        grid = WavelengthGrid(**data["grid"])
        d = grid.count
        columns = data["components"]
        if len(columns) != d:
            raise DataError(f"Model file has {len(columns)} components, expected {d}")
        return PcaModel(
            grid=grid,
            mean=_decode(data["mean"], d, "mean"),
            eigenvalues=_decode(data["eigenvalues"], d, "eigenvalues"),
            components=np.column_stack(
                [_decode(col, d, f"components[{j}]") for j, col in enumerate(columns)]
            ),
            centering=Centering(data["centering"]),
        )
    except (KeyError, TypeError) as e:
        raise DataError(f"Incomplete model file: {e}") from e


def save_model(model: PcaModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(model_to_dict(model), f, sort_keys=False, width=1_000_000_000)
    logger.info(f"Saved PCA model ({model.d} components, {model.centering.value}) to {path}")
    return path


def load_model(path: Union[str, Path]) -> PcaModel:
    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise DataError(f"{path}: {e}") from e
    except yaml.YAMLError as e:
        raise DataError(f"{path}: invalid model file: {e}") from e
    try:
        model = model_from_dict(data)
    except (DataError, ValueError) as e:
        raise DataError(f"{path}: {e}") from e
    logger.debug(f"Loaded PCA model from {path}")
    return model
