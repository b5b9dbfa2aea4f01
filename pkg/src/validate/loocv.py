"""
Leave-one-out validation

Every harness refits on the n-1 remaining spectra for each holdout, scores
the held-out spectrum, and assembles results in sample order. Holdouts are
independent and may run on a thread pool; pool.map keeps the order fixed so
reports are identical for any worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar
import logging

import numpy as np
from numpy.typing import NDArray

from src.core.errors import ConfigurationError
from src.core.spectra import SpectralDataset
from src.pca.engine import fit
from src.pca.model import Centering, PcaModel
from src.reconstruct.bands import BandSelection
from src.reconstruct.lincomb import apply_lincomb, fit_lincomb
from src.reconstruct.spectral import (
    Weights,
    project_values,
    reconstruct_array,
    solve_weights_from_bands,
)
from src.validate.report import ProtocolDescriptor, ReconstructionReport, build_report

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _check_components(ds: SpectralDataset, m: int) -> None:
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= ds.grid.count:
        raise ConfigurationError(f"Number of components must be in [1, {ds.grid.count}], got {m}")


def _run_holdouts(n: int, holdout: Callable[[int], T], workers: int) -> List[T]:
    if workers <= 1:
        return [holdout(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(holdout, range(n)))


def _full_recon(model: PcaModel, values: NDArray[np.float64], m: int) -> NDArray[np.float64]:
    return reconstruct_array(model, project_values(model, values, m))


def loocv_full(
    ds: SpectralDataset,
    m: int,
    centering: Centering = Centering.CENTERED,
    workers: int = 1,
) -> ReconstructionReport:
    """Full-band reconstruction with m PCs, each spectrum scored on a model fit without it"""

    ds.require_samples(3, "Leave-one-out validation")
    _check_components(ds, m)
    centering = Centering(centering)
    truth = ds.matrix

    def holdout(i: int) -> NDArray[np.float64]:
        model = fit(ds.without(i), centering)
        return _full_recon(model, truth[i], m)

    recon = np.vstack(_run_holdouts(ds.n, holdout, workers))
    logger.info(f"LOOCV full-band on '{ds.name}' with {m} PCs over {ds.n} holdouts")
    return build_report(
        ProtocolDescriptor(
            mode="full",
            dataset=ds.name,
            n_samples=ds.n,
            components=m,
            centering=centering.value,
        ),
        ds.labels,
        ds.grid.wavelengths,
        truth,
        recon,
    )


def loocv_bands(
    ds: SpectralDataset,
    sel: BandSelection,
    m: int,
    centering: Centering = Centering.CENTERED,
    workers: int = 1,
) -> ReconstructionReport:
    """Whole-spectrum reconstruction from the holdout's reflectance at the selected bands"""

    ds.require_samples(3, "Leave-one-out validation")
    _check_components(ds, m)
    sel.check_grid(ds.grid)
    if sel.k < m:
        raise ConfigurationError(f"Under-determined band solve: {sel.k} bands for {m} components")
    centering = Centering(centering)
    truth = ds.matrix
    idx = sel.index_array

    def holdout(i: int) -> Tuple[NDArray[np.float64], bool]:
        model = fit(ds.without(i), centering)
        weights: Weights = solve_weights_from_bands(model, sel, truth[i, idx], m)
        return reconstruct_array(model, weights), weights.rank_deficient

    results = _run_holdouts(ds.n, holdout, workers)
    recon = np.vstack([r for r, _ in results])
    deficient = sum(1 for _, flag in results if flag)
    if deficient:
        logger.warning(f"{deficient} of {ds.n} band solves on '{ds.name}' were rank deficient")
    logger.info(
        f"LOOCV selected-band on '{ds.name}' with {sel.k} bands and {m} PCs over {ds.n} holdouts"
    )
    return build_report(
        ProtocolDescriptor(
            mode="bands",
            dataset=ds.name,
            n_samples=ds.n,
            components=m,
            centering=centering.value,
            bands_nm=sel.wavelengths_nm,
        ),
        ds.labels,
        ds.grid.wavelengths,
        truth,
        recon,
        rank_deficient=deficient,
    )


def loocv_lincomb(
    ds: SpectralDataset,
    source: BandSelection,
    target_nm: float,
    workers: int = 1,
) -> ReconstructionReport:
    """Target-band prediction from the source bands; the report also carries the full-dataset fit"""

    source.check_grid(ds.grid)
    ds.require_samples(source.k + 1, f"Leave-one-out lin-comb with {source.k} source bands")
    target_index = ds.grid.index_of(target_nm)
    if target_index in source.indices:
        raise ConfigurationError(f"Target band {target_nm} nm is also a source band")

    matrix = ds.matrix
    truth = matrix[:, [target_index]]
    sources = matrix[:, source.index_array]

    def holdout(i: int) -> Tuple[float, bool]:
        lc = fit_lincomb(ds.without(i), source, target_nm)
        return apply_lincomb(lc, sources[i]), lc.rank < source.k

    results = _run_holdouts(ds.n, holdout, workers)
    recon = np.asarray([[value] for value, _ in results], dtype=np.float64)
    deficient = sum(1 for _, flag in results if flag)

    full_fit = fit_lincomb(ds, source, target_nm)
    logger.info(
        f"LOOCV lin-comb on '{ds.name}': {target_nm:g} nm from "
        f"{[f'{w:g}' for w in source.wavelengths_nm]} nm over {ds.n} holdouts"
    )
    return build_report(
        ProtocolDescriptor(
            mode="lincomb",
            dataset=ds.name,
            n_samples=ds.n,
            bands_nm=source.wavelengths_nm,
            target_nm=full_fit.target_band,
        ),
        ds.labels,
        [full_fit.target_band],
        truth,
        recon,
        rank_deficient=deficient,
        lincomb=full_fit,
    )


def evaluate_in_sample(
    ds: SpectralDataset,
    m: int,
    centering: Centering = Centering.CENTERED,
) -> ReconstructionReport:
    """Fit once on the whole dataset and score every member with m PCs"""

    _check_components(ds, m)
    centering = Centering(centering)
    model = fit(ds, centering)
    truth = ds.matrix
    recon = np.vstack([_full_recon(model, row, m) for row in truth])
    return build_report(
        ProtocolDescriptor(
            mode="in-sample",
            dataset=ds.name,
            n_samples=ds.n,
            components=m,
            centering=centering.value,
        ),
        ds.labels,
        ds.grid.wavelengths,
        truth,
        recon,
    )


def sweep_components(
    ds: SpectralDataset,
    m_values: Sequence[int],
    centering: Centering = Centering.CENTERED,
    workers: int = 1,
) -> List[ReconstructionReport]:
    """Full-band LOOCV for several m, one fit per holdout shared across all m"""

    if not m_values:
        raise ConfigurationError("Component sweep needs at least one m")
    ds.require_samples(3, "Leave-one-out validation")
    for m in m_values:
        _check_components(ds, m)
    centering = Centering(centering)
    truth = ds.matrix

    def holdout(i: int) -> List[NDArray[np.float64]]:
        model = fit(ds.without(i), centering)
        return [_full_recon(model, truth[i], m) for m in m_values]

    per_sample = _run_holdouts(ds.n, holdout, workers)
    logger.info(f"LOOCV sweep on '{ds.name}' over m = {list(m_values)}")
    return [
        build_report(
            ProtocolDescriptor(
                mode="full",
                dataset=ds.name,
                n_samples=ds.n,
                components=m,
                centering=centering.value,
            ),
            ds.labels,
            ds.grid.wavelengths,
            truth,
            np.vstack([recons[j] for recons in per_sample]),
        )
        for j, m in enumerate(m_values)
    ]
