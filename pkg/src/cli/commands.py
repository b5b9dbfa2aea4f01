"""
Command implementations

Each command takes explicit arguments, writes its files and returns what it
produced; src.main maps command-line flags onto these functions and turns
SpecReconError into exit codes.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import logging

import numpy as np
from numpy.typing import NDArray
import pandas as pd

from src.cli.outputs import (
    coefficients_frame,
    components_frame,
    contribution_frame,
    format_summary,
    mean_spectra_frame,
    samples_frame,
    scatter_frame,
    stacked,
    sweep_frame,
    write_frame,
    write_run_meta,
)
from src.cli.protocol import ProtocolFile, read_protocol
from src.config.settings import settings
from src.core.errors import ConfigurationError, DataError
from src.core.spectra import SpectralDataset
from src.ingest.dataset_csv import WAVELENGTH_COLUMN, read_dataset_csv, write_dataset_csv
from src.ingest.manifest import load_manifest, read_manifest
from src.pca.engine import contribution, fit
from src.pca.model import Centering, PcaModel, load_model, save_model
from src.reconstruct.bands import BandSelection
from src.reconstruct.lincomb import load_lincomb, save_lincomb
from src.reconstruct.spectral import (
    project_values,
    reconstruct_array,
    solve_weights_from_bands,
)
from src.validate.loocv import (
    evaluate_in_sample,
    loocv_bands,
    loocv_full,
    loocv_lincomb,
    sweep_components,
)
from src.validate.metrics import mean_relative_error, relative_errors
from src.validate.report import ReconstructionReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_dataset(path: PathLike, workers: int = 1) -> SpectralDataset:
    """A canonical dataset CSV or a manifest YAML"""

    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".yaml", ".yml"):
        return load_manifest(read_manifest(path), workers=workers)
    if suffix == ".csv":
        return read_dataset_csv(path)
    raise ConfigurationError(f"{path}: datasets are .csv files or .yaml manifests")


def cmd_ingest(manifest_path: PathLike, out_path: PathLike, workers: Optional[int] = None) -> Path:
    """Manifest to canonical dataset CSV"""

    manifest = read_manifest(manifest_path)
    ds = load_manifest(manifest, workers=workers or settings.workers)
    return write_dataset_csv(ds, out_path)


def cmd_pca(
    dataset_path: PathLike,
    out_path: PathLike,
    centering: Centering = Centering.CENTERED,
    n_components: int = 6,
) -> Dict[str, Path]:
    """Fit a model; write it with its contribution curve and leading PC spectra"""

    if n_components < 1:
        raise ConfigurationError(f"--pcs must be >= 1, got {n_components}")
    ds = load_dataset(dataset_path, workers=settings.workers)
    model = fit(ds, Centering(centering))
    curve = contribution(model.eigenvalues)

    out_path = Path(out_path)
    stem = out_path.parent / out_path.stem
    files = {
        "model": save_model(model, out_path),
        "contribution": write_frame(
            contribution_frame(model, curve), Path(f"{stem}.contribution.csv")
        ),
        "components": write_frame(
            components_frame(model, n_components), Path(f"{stem}.components.csv")
        ),
    }
    logger.info(
        f"PCA of '{ds.name}': first PC carries {curve.at(1):.4%}, "
        f"first {min(6, model.d)} carry {curve.at(min(6, model.d)):.4%}"
    )
    return files


@dataclass
class LoocvRun:
    protocol: ProtocolFile
    reports: List[ReconstructionReport]
    files: Dict[str, Path] = field(default_factory=dict)
    summary: str = ""


def _band_selection(protocol: ProtocolFile, ds: SpectralDataset, bands: Sequence[float]) -> BandSelection:
    return BandSelection.from_wavelengths(ds.grid, bands, snap=protocol.snap)


def cmd_loocv(
    protocol_path: PathLike,
    out_dir: Optional[PathLike] = None,
    workers: Optional[int] = None,
) -> LoocvRun:
    """Run a protocol's leave-one-out validation and write its report files"""

    protocol = read_protocol(protocol_path)
    workers = workers or protocol.workers or settings.workers
    ds = load_dataset(protocol.dataset_path, workers=workers)
    out = Path(out_dir) if out_dir is not None else protocol.output_path
    name = protocol.name
    files: Dict[str, Path] = {}

    if protocol.mode == "full":
        m_values = protocol.component_list
        if protocol.is_sweep:
            reports = sweep_components(ds, m_values, protocol.centering, workers=workers)
            in_sample = [evaluate_in_sample(ds, m, protocol.centering) for m in m_values]
            files["sweep"] = write_frame(sweep_frame(reports, in_sample), out / f"{name}_sweep.csv")
            samples = stacked([samples_frame(r) for r in reports], "m", m_values)
            scatter = stacked([scatter_frame(r) for r in reports], "m", m_values)
        else:
            reports = [loocv_full(ds, m_values[0], protocol.centering, workers=workers)]
            samples = samples_frame(reports[0])
            scatter = scatter_frame(reports[0])
        # averaged spectra describe the last m listed
        final = reports[-1]
        files["samples"] = write_frame(samples, out / f"{name}_samples.csv")
        files["scatter"] = write_frame(scatter, out / f"{name}_scatter.csv")
        files["mean_spectra"] = write_frame(
            mean_spectra_frame(final), out / f"{name}_mean_spectra.csv"
        )

    elif protocol.mode == "bands":
        sel = _band_selection(protocol, ds, protocol.bands_nm or [])
        report = loocv_bands(ds, sel, protocol.component_list[0], protocol.centering, workers=workers)
        reports = [report]
        files["samples"] = write_frame(samples_frame(report), out / f"{name}_samples.csv")
        files["scatter"] = write_frame(scatter_frame(report), out / f"{name}_scatter.csv")
        files["mean_spectra"] = write_frame(
            mean_spectra_frame(report, sel.wavelengths_nm), out / f"{name}_mean_spectra.csv"
        )

    else:
        assert protocol.lincomb is not None
        source = _band_selection(protocol, ds, protocol.lincomb.source_nm)
        targets = [
            float(ds.grid.wavelengths[ds.grid.index_of(t, snap=protocol.snap)])
            for t in protocol.lincomb.targets_nm
        ]
        reports = [loocv_lincomb(ds, source, t, workers=workers) for t in targets]
        files["samples"] = write_frame(
            stacked([samples_frame(r) for r in reports], "target_nm", targets),
            out / f"{name}_samples.csv",
        )
        files["scatter"] = write_frame(
            pd.concat([scatter_frame(r) for r in reports], ignore_index=True),
            out / f"{name}_scatter.csv",
        )
        files["coefficients"] = write_frame(
            coefficients_frame(reports), out / f"{name}_coefficients.csv"
        )
        for report in reports:
            assert report.lincomb is not None
            key = f"lincomb_{report.lincomb.target_band:g}nm"
            files[key] = save_lincomb(report.lincomb, out / f"{name}_{key}.yaml", grid=ds.grid)

    summary = format_summary(name, reports, digits=settings.summary_digits)
    summary_path = out / f"{name}_summary.txt"
    summary_path.write_text(summary, encoding="utf-8")
    files["summary"] = summary_path
    files["run_meta"] = write_run_meta(
        out,
        command="loocv",
        inputs={"protocol": Path(protocol_path), "dataset": protocol.dataset_path, "workers": workers},
    )
    logger.info(f"Protocol '{name}' finished; {len(files)} files in {out}")
    return LoocvRun(protocol=protocol, reports=reports, files=files, summary=summary)


@dataclass
class ReconstructionResult:
    """Reconstructed values (one row per input), with errors when the truth is known"""

    labels: List[str]
    wavelengths_nm: NDArray[np.float64]
    values: NDArray[np.float64]
    truth: Optional[NDArray[np.float64]] = None
    errors: Dict[str, float] = field(default_factory=dict)
    frame: Optional[pd.DataFrame] = None

    @property
    def scalar(self) -> Optional[float]:
        if self.values.size == 1:
            return float(self.values.reshape(-1)[0])
        return None


def _require(value: object, flag: str, mode: str) -> None:
    if value is None:
        raise ConfigurationError(f"{mode} mode needs {flag}")


def _input_dataset(spectrum_path: PathLike, model: Optional[PcaModel] = None) -> SpectralDataset:
    ds = read_dataset_csv(spectrum_path)
    if model is not None and ds.grid != model.grid:
        raise DataError(
            f"{spectrum_path}: dataset is on {ds.grid.describe()}, "
            f"model expects {model.grid.describe()}"
        )
    return ds


def _spectra_result(
    labels: List[str],
    model: PcaModel,
    recon: NDArray[np.float64],
    truth: Optional[NDArray[np.float64]],
) -> ReconstructionResult:
    frame = pd.DataFrame(recon.T, columns=labels)
    frame.insert(0, WAVELENGTH_COLUMN, model.grid.wavelengths)
    errors = {}
    if truth is not None:
        errors = {label: mean_relative_error(t, r) for label, t, r in zip(labels, truth, recon)}
    return ReconstructionResult(
        labels=labels,
        wavelengths_nm=model.grid.wavelengths,
        values=recon,
        truth=truth,
        errors=errors,
        frame=frame,
    )


def cmd_reconstruct(
    mode: str,
    model_path: Optional[PathLike] = None,
    spectrum_path: Optional[PathLike] = None,
    bands_nm: Optional[Sequence[float]] = None,
    values: Optional[Sequence[float]] = None,
    components: Optional[int] = None,
    snap: bool = False,
    lincomb_path: Optional[PathLike] = None,
    out_path: Optional[PathLike] = None,
) -> ReconstructionResult:
    """One-shot reconstruction from a full spectrum, band values or a lin-comb model"""

    if mode in ("full", "bands"):
        _require(model_path, "--model", mode)
        _require(components, "--components", mode)
        assert model_path is not None and components is not None
        model = load_model(model_path)
        model.check_components(components)

        if mode == "full":
            _require(spectrum_path, "--spectrum", mode)
            assert spectrum_path is not None
            ds = _input_dataset(spectrum_path, model)
            truth = ds.matrix
            recon = np.vstack(
                [reconstruct_array(model, project_values(model, row, components)) for row in truth]
            )
            result = _spectra_result(ds.labels, model, recon, truth)
        else:
            _require(bands_nm, "--bands", mode)
            sel = BandSelection.from_wavelengths(model.grid, bands_nm or [], snap=snap)
            if (values is None) == (spectrum_path is None):
                raise ConfigurationError("bands mode needs exactly one of --values and --spectrum")
            if values is not None:
                weights = solve_weights_from_bands(model, sel, values, components)
                recon = reconstruct_array(model, weights)[np.newaxis, :]
                result = _spectra_result(["reconstruction"], model, recon, None)
            else:
                assert spectrum_path is not None
                ds = _input_dataset(spectrum_path, model)
                truth = ds.matrix
                recon = np.vstack(
                    [
                        reconstruct_array(
                            model, solve_weights_from_bands(model, sel, row[sel.index_array], components)
                        )
                        for row in truth
                    ]
                )
                result = _spectra_result(ds.labels, model, recon, truth)

    elif mode == "lincomb":
        _require(lincomb_path, "--lincomb", mode)
        assert lincomb_path is not None
        lc = load_lincomb(lincomb_path)
        if (values is None) == (spectrum_path is None):
            raise ConfigurationError("lincomb mode needs exactly one of --values and --spectrum")
        target = np.array([lc.target_band])
        if values is not None:
            prediction = lc.predict(values)
            result = ReconstructionResult(
                labels=["prediction"],
                wavelengths_nm=target,
                values=prediction.reshape(1, 1),
                frame=pd.DataFrame(
                    {"label": ["prediction"], "target_nm": target, "prediction": prediction}
                ),
            )
        else:
            assert spectrum_path is not None
            ds = _input_dataset(spectrum_path)
            sources = BandSelection.from_wavelengths(ds.grid, lc.source_bands.wavelengths_nm)
            truth = ds.matrix[:, [ds.grid.index_of(lc.target_band)]]
            prediction = lc.predict(ds.matrix[:, sources.index_array])
            errors = {}
            for label, t, p in zip(ds.labels, truth, prediction):
                rel, _ = relative_errors(t, [p])
                errors[label] = float(rel[0])
            result = ReconstructionResult(
                labels=ds.labels,
                wavelengths_nm=target,
                values=prediction.reshape(-1, 1),
                truth=truth,
                errors=errors,
                frame=pd.DataFrame(
                    {
                        "label": ds.labels,
                        "target_nm": np.repeat(lc.target_band, ds.n),
                        "prediction": prediction,
                        "truth": truth.reshape(-1),
                    }
                ),
            )
    else:
        raise ConfigurationError(f"Unknown reconstruction mode '{mode}'")

    if out_path is not None and result.frame is not None:
        write_frame(result.frame, out_path)
        logger.info(f"Wrote {len(result.labels)} reconstruction(s) to {out_path}")
    return result
