"""
Report files

Plot-ready CSV tables (full-precision decimals, fixed column order, "\\n"
line endings), the rounded human summary, and the run metadata sidecar.
Nothing time-dependent goes into the CSV tables.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union
import math

import numpy as np
import pandas as pd
import yaml

from src import __version__
from src.ingest.dataset_csv import FLOAT_FORMAT, WAVELENGTH_COLUMN
from src.pca.engine import ContributionCurve
from src.pca.model import PcaModel
from src.validate.report import ReconstructionReport

RUN_META_FILE = "run_meta.yaml"


def write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"),
        encoding="utf-8",
    )
    return path


def contribution_frame(model: PcaModel, curve: ContributionCurve) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "m": np.arange(1, model.d + 1),
            "eigenvalue": model.eigenvalues,
            "cumulative_contribution": curve.v,
        }
    )


def components_frame(model: PcaModel, count: int) -> pd.DataFrame:
    """Wavelength column followed by the first count principal components"""
    count = min(count, model.d)
    frame = pd.DataFrame(
        model.components[:, :count], columns=[f"PC{j + 1}" for j in range(count)]
    )
    frame.insert(0, WAVELENGTH_COLUMN, model.grid.wavelengths)
    return frame


def samples_frame(report: ReconstructionReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "label": list(report.labels),
            "mean_relative_error": report.relative_errors,
            "mean_absolute_error": report.absolute_errors,
            "norm_ratio_error": report.norm_ratio_errors,
            "r_squared": report.sample_r_squared,
            "excluded_points": report.excluded,
        }
    )


def scatter_frame(report: ReconstructionReport) -> pd.DataFrame:
    """Pooled (truth, reconstruction) pairs, one row per sample and wavelength"""
    n, width = report.truth.shape
    truth, recon = report.pooled()
    return pd.DataFrame(
        {
            "label": np.repeat(np.asarray(report.labels, dtype=object), width),
            WAVELENGTH_COLUMN: np.tile(report.wavelengths_nm, n),
            "truth": truth,
            "recon": recon,
        }
    )


def mean_spectra_frame(
    report: ReconstructionReport, bands_nm: Sequence[float] = ()
) -> pd.DataFrame:
    selected = set(float(w) for w in bands_nm)
    return pd.DataFrame(
        {
            WAVELENGTH_COLUMN: report.wavelengths_nm,
            "truth_mean": report.mean_truth(),
            "recon_mean": report.mean_recon(),
            "selected_band": [int(float(w) in selected) for w in report.wavelengths_nm],
        }
    )


def stacked(
    frames: Iterable[pd.DataFrame], key: str, keys: Iterable[Any]
) -> pd.DataFrame:
    """Concatenate per-run frames with a leading key column"""
    parts = []
    for frame, value in zip(frames, keys):
        frame = frame.copy()
        frame.insert(0, key, value)
        parts.append(frame)
    return pd.concat(parts, ignore_index=True)


def sweep_frame(
    reports: Sequence[ReconstructionReport],
    in_sample: Optional[Sequence[ReconstructionReport]] = None,
) -> pd.DataFrame:
    frame = pd.DataFrame(
        {
            "m": [r.protocol.components for r in reports],
            "mean_relative_error": [r.mean_relative_error for r in reports],
            "mean_absolute_error": [r.mean_absolute_error for r in reports],
            "norm_ratio_error": [r.mean_norm_ratio_error for r in reports],
            "r_squared": [r.r_squared for r in reports],
        }
    )
    if in_sample is not None:
        frame["in_sample_mean_relative_error"] = [r.mean_relative_error for r in in_sample]
    return frame


def coefficients_frame(reports: Sequence[ReconstructionReport]) -> pd.DataFrame:
    """Full-dataset lin-comb coefficients next to the LOOCV errors, one row per target"""
    rows: List[Dict[str, Any]] = []
    for report in reports:
        lc = report.lincomb
        if lc is None:
            continue
        row: Dict[str, Any] = {"target_nm": lc.target_band}
        for w, a in zip(lc.source_bands.wavelengths_nm, lc.coeffs):
            row[f"a_{w:g}nm"] = float(a)
        row.update(
            {
                "rank": lc.rank,
                "mean_absolute_error": report.mean_absolute_error,
                "mean_relative_error": report.mean_relative_error,
                "r_squared": report.r_squared,
            }
        )
        rows.append(row)
    return pd.DataFrame(rows)


def _rounded(value: Any, digits: int) -> str:
    if value is None:
        return "-"
    if isinstance(value, (list, tuple)):
        return " ".join(f"{v:g}" for v in value) if value else "-"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.{digits}g}"
    return str(value)


def format_summary(name: str, reports: Sequence[ReconstructionReport], digits: int = 4) -> str:
    """Human-readable summary block per report, rounded to digits significant figures"""

    lines = [f"protocol: {name}"]
    for report in reports:
        lines.append("")
        for key, value in report.summary().items():
            lines.append(f"{key}: {_rounded(value, digits)}")
        if report.lincomb is not None:
            coeffs = " ".join(
                f"{w:g}nm={a:.{digits}g}"
                for w, a in zip(report.lincomb.source_bands.wavelengths_nm, report.lincomb.coeffs)
            )
            lines.append(f"coefficients: {coeffs}")
    return "\n".join(lines) + "\n"


def write_run_meta(directory: Union[str, Path], command: str, inputs: Dict[str, Any]) -> Path:
    """Sidecar with the UTC time and inputs of a run"""
    path = Path(directory) / RUN_META_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "timestamp_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "command": command,
        "inputs": {key: str(value) for key, value in inputs.items()},
    }
    with open(path, "w") as f:
        yaml.safe_dump(meta, f, sort_keys=False)
    return path
