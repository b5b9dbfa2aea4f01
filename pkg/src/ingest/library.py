"""
Spectral library file reader

Reads the plain two-column ASCII layout shared by the USGS and ASTER
spectral library distributions: free-text header lines followed by
(wavelength, reflectance) rows.
"""

from pathlib import Path
from typing import List, Literal, Tuple, Union
import logging
import re

from src.core.errors import DataError

logger = logging.getLogger(__name__)

WavelengthUnits = Literal["auto", "nm", "um"]
ValueUnits = Literal["auto", "fraction", "percent"]

# max wavelength below this is taken as micrometers
MICROMETER_THRESHOLD = 20.0
NM_DECIMALS = 6

_PERCENT_HEADER = re.compile(r"units\s*[=:].*percent", re.IGNORECASE)
_SEPARATOR = re.compile(r"[,\s]+")


def _decode(text: Union[bytes, str]) -> str:
    if isinstance(text, bytes):
        return text.decode("utf-8", errors="replace")
    return text


def _is_header(line: str) -> bool:
    return line[0] in "#!" or line[0].isalpha()


def parse_two_column(
    text: Union[bytes, str],
    wavelength_units: WavelengthUnits = "auto",
    value_units: ValueUnits = "auto",
) -> List[Tuple[float, float]]:
    """Parse a two-column library file into (wavelength nm, reflectance) pairs"""

    rows: List[Tuple[float, float]] = []
    percent_declared = False
    dropped = 0

    for line_number, raw_line in enumerate(_decode(text).splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if _is_header(line):
            if _PERCENT_HEADER.search(line):
                percent_declared = True
            continue

        fields = [f for f in _SEPARATOR.split(line) if f]
        try:
            numbers = [float(f) for f in fields]
        except ValueError as e:
            raise DataError(f"Line {line_number}: non-numeric field in '{line}'") from e
        if len(numbers) != 2:
            raise DataError(
                f"Line {line_number}: expected 2 numeric fields, found {len(numbers)}"
            )

        wavelength, value = numbers
        # deleted-channel markers such as -1.23e34
        if value < 0:
            dropped += 1
            continue
        rows.append((wavelength, value))

    if not rows:
        raise DataError("No parseable data rows")
    if dropped:
        logger.debug(f"Dropped {dropped} negative sentinel rows")

    in_micrometers = (
        wavelength_units == "um"
        or (wavelength_units == "auto" and max(w for w, _ in rows) < MICROMETER_THRESHOLD)
    )
    in_percent = value_units == "percent" or (value_units == "auto" and percent_declared)

    if in_micrometers:
        rows = [(round(w * 1000.0, NM_DECIMALS), v) for w, v in rows]
    if in_percent:
        rows = [(w, v / 100.0) for w, v in rows]
    return rows


def read_library_file(
    path: Union[str, Path],
    wavelength_units: WavelengthUnits = "auto",
    value_units: ValueUnits = "auto",
) -> List[Tuple[float, float]]:
    """Read a library file from disk, ascending in wavelength"""

    with open(path, "rb") as f:
        pairs = parse_two_column(f.read(), wavelength_units, value_units)

    # ASTER files list wavelengths in descending order
    if len(pairs) > 1 and all(a[0] > b[0] for a, b in zip(pairs, pairs[1:])):
        pairs.reverse()
    return pairs
