"""
Canonical dataset CSV

Wide layout: header `wavelength_nm,<label1>,<label2>,...`, one row per grid
point, full-precision decimals. Every module downstream of ingestion reads
datasets only in this format.
"""

from pathlib import Path
from typing import Union
import io
import logging

import numpy as np
import pandas as pd

from src.core.errors import DataError
from src.core.spectra import SpectralDataset, WavelengthGrid

logger = logging.getLogger(__name__)

WAVELENGTH_COLUMN = "wavelength_nm"
FLOAT_FORMAT = "%.17g"
SPACING_TOLERANCE = 1e-9


def parse_dataset_csv(text: Union[bytes, str], name: str = "dataset") -> SpectralDataset:
    """Parse a canonical dataset CSV"""

    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if not text.strip():
        raise DataError("Dataset CSV is empty")

    # labels are free-form: read them verbatim so quoting and duplicates survive
    try:
        header_row = pd.read_csv(
            io.StringIO(text),
            header=None,
            nrows=1,
            dtype=str,
            keep_default_na=False,
        )
    except (pd.errors.ParserError, ValueError) as e:
        raise DataError(f"Malformed dataset CSV header: {e}") from e
    header = header_row.iloc[0].tolist()
    if header[0] != WAVELENGTH_COLUMN:
        raise DataError(
            f"First column must be '{WAVELENGTH_COLUMN}', found '{header[0]}'"
        )
    labels = header[1:]
    if not labels:
        raise DataError("Dataset CSV has no sample columns")
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        raise DataError(f"Duplicate sample labels: {', '.join(duplicates)}")

    try:
        frame = pd.read_csv(
            io.StringIO(text),
            skiprows=1,
            header=None,
            dtype=np.float64,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError as e:
        raise DataError("Dataset CSV has no data rows") from e
    except (pd.errors.ParserError, ValueError) as e:
        raise DataError(f"Malformed or ragged dataset CSV: {e}") from e

    if frame.empty:
        raise DataError("Dataset CSV has no data rows")
    if frame.shape[1] != len(header):
        raise DataError(
            f"Ragged dataset CSV: header has {len(header)} fields, "
            f"rows have {frame.shape[1]}"
        )
    if frame.isna().any().any():
        row = int(np.argmax(frame.isna().any(axis=1).to_numpy())) + 2
        raise DataError(f"Ragged or empty field in dataset CSV at line {row}")

    wavelengths = frame[0].to_numpy()
    grid = _infer_grid(wavelengths)
    matrix = frame.iloc[:, 1:].to_numpy().T

    logger.debug(f"Parsed dataset CSV: {len(labels)} spectra on {grid.describe()}")
    return SpectralDataset.from_matrix(name, grid, matrix, labels)


def _infer_grid(wavelengths: np.ndarray) -> WavelengthGrid:
    if wavelengths.size < 2:
        raise DataError("Dataset CSV needs at least 2 wavelength rows to define a grid")
    steps = np.diff(wavelengths)
    step = (wavelengths[-1] - wavelengths[0]) / (wavelengths.size - 1)
    if step <= 0 or np.max(np.abs(steps - step)) > SPACING_TOLERANCE * max(1.0, abs(step)):
        raise DataError("Wavelength column is not uniformly spaced and ascending")

    grid = WavelengthGrid(float(wavelengths[0]), float(wavelengths[-1]), float(step))
    if grid.count != wavelengths.size:
        raise DataError(
            f"Wavelength column has {wavelengths.size} rows, grid implies {grid.count}"
        )
    return grid


def format_dataset_csv(ds: SpectralDataset) -> str:
    """Render a dataset in the canonical CSV layout"""
    frame = pd.DataFrame(ds.matrix.T, columns=ds.labels)
    frame.insert(0, WAVELENGTH_COLUMN, ds.grid.wavelengths)
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_dataset_csv(ds: SpectralDataset, path: Union[str, Path]) -> Path:
    """Write a dataset as canonical CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_dataset_csv(ds), encoding="utf-8")
    logger.info(f"Wrote dataset '{ds.name}' ({ds.n} spectra) to {path}")
    return path


def read_dataset_csv(path: Union[str, Path], name: str = None) -> SpectralDataset:
    """Read a canonical dataset CSV from disk, named after the file by default"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DataError(f"{path}: {e}") from e
    try:
        return parse_dataset_csv(data, name=name or path.stem)
    except DataError as e:
        raise DataError(f"{path}: {e}") from e
