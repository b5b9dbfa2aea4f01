"""
Dataset manifests

A manifest names a dataset, its working grid and the library files that
make it up. Manifests are YAML files validated into pydantic models; paths
inside a manifest are relative to the manifest file.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Union
import logging

from pydantic import BaseModel, Field, ValidationError, field_validator
import yaml

from src.core.errors import ConfigurationError, DataError, SpecReconError
from src.core.spectra import SpectralDataset, Spectrum, WavelengthGrid, resample, smooth
from src.ingest.library import ValueUnits, WavelengthUnits, read_library_file

logger = logging.getLogger(__name__)


class GridSpec(BaseModel):
    """Grid definition as written in manifests and protocols"""

    start_nm: float = 400.0
    end_nm: float = 900.0
    step_nm: float = 1.0

    def to_grid(self) -> WavelengthGrid:
        return WavelengthGrid(self.start_nm, self.end_nm, self.step_nm)


class SpectrumSource(BaseModel):
    """One library file contributing one spectrum"""

    path: Path
    label: str
    smoothing_window: Optional[int] = None


class DatasetManifest(BaseModel):
    """Dataset name, grid and the per-spectrum sources"""

    name: str
    description: Optional[str] = None
    provenance: Optional[str] = None
    grid: GridSpec = Field(default_factory=GridSpec)
    wavelength_units: WavelengthUnits = "auto"
    value_units: ValueUnits = "auto"
    smoothing_window: Optional[int] = None
    spectra: List[SpectrumSource]
    base_dir: Path = Field(default=Path("."), exclude=True)

    @field_validator("spectra")
    @classmethod
    def _labels_unique(cls, spectra: List[SpectrumSource]) -> List[SpectrumSource]:
        if not spectra:
            raise ValueError("manifest lists no spectra")
        labels = [s.label for s in spectra]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"duplicate labels: {', '.join(duplicates)}")
        return spectra

    def resolve(self, source: SpectrumSource) -> Path:
        return source.path if source.path.is_absolute() else self.base_dir / source.path

    def check_files(self) -> None:
        """Every referenced file must exist"""
        missing = [str(self.resolve(s)) for s in self.spectra if not self.resolve(s).is_file()]
        if missing:
            raise DataError(f"Manifest '{self.name}' references missing files: {', '.join(missing)}")


def read_manifest(path: Union[str, Path]) -> DatasetManifest:
    """Load and validate a manifest YAML file"""

    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: invalid YAML: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: manifest must be a mapping")
    try:
        manifest = DatasetManifest(**data)
    except ValidationError as e:
        raise ConfigurationError(f"{path}: invalid manifest: {e}") from e

    manifest.base_dir = path.parent
    logger.debug(f"Read manifest '{manifest.name}' with {len(manifest.spectra)} sources")
    return manifest


def _load_source(manifest: DatasetManifest, grid: WavelengthGrid, source: SpectrumSource) -> Spectrum:
    path = manifest.resolve(source)
    try:
        pairs = read_library_file(path, manifest.wavelength_units, manifest.value_units)
        spectrum = resample(pairs, grid, label=source.label)
        window = source.smoothing_window or manifest.smoothing_window
        if window and window > 1:
            spectrum = smooth(spectrum, window)
        return spectrum
    except OSError as e:
        raise DataError(f"{path}: {e}") from e
    except SpecReconError as e:
        raise type(e)(f"{path}: {e}") from e


def load_manifest(manifest: DatasetManifest, workers: int = 1) -> SpectralDataset:
    """Parse, resample and smooth every manifest source into a dataset"""

    manifest.check_files()
    grid = manifest.grid.to_grid()
    logger.info(
        f"Loading dataset '{manifest.name}': {len(manifest.spectra)} spectra onto {grid.describe()}"
    )

    # map() keeps manifest order whatever the completion order
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        spectra = list(pool.map(lambda s: _load_source(manifest, grid, s), manifest.spectra))

    return SpectralDataset(name=manifest.name, grid=grid, spectra=tuple(spectra))
