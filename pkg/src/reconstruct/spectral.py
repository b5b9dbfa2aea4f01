"""
PC reconstruction models

Full-band reconstruction from projected weights, and selected-band
reconstruction where the weights come from a generalized-inverse solve on
the rows of the component matrix at k chosen bands.
"""

from dataclasses import dataclass
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.errors import ConfigurationError, DataError
from src.core.spectra import Spectrum
from src.pca.model import PcaModel
from src.reconstruct.bands import BandSelection
from src.reconstruct.linalg import RANK_RTOL, pinv_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Weights:
    """PC weighting coefficients; rank < m flags a minimum-norm solve"""

    w: NDArray[np.float64]
    rank: int = -1

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=np.float64).reshape(-1)
        if w.size < 1:
            raise ConfigurationError("Weights need at least one component")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        if self.rank < 0:
            object.__setattr__(self, "rank", w.size)

    @property
    def m(self) -> int:
        return self.w.size

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.m


def project(model: PcaModel, r: Spectrum, m: int) -> Weights:
    """Weights of the first m PCs for a full spectrum"""

    model.check_spectrum(r)
    return project_values(model, r.values, m)


def project_values(model: PcaModel, values: NDArray[np.float64], m: int) -> Weights:
    basis = model.basis(m)
    target = values - model.mean if model.centered else values
    return Weights(basis.T @ target)


def reconstruct_array(model: PcaModel, w: Weights) -> NDArray[np.float64]:
    """Reconstructed reflectance as a raw array (no reflectance-range check)"""
    if w.m > model.d:
        raise ConfigurationError(f"{w.m} weights exceed the model dimension {model.d}")
    values = model.basis(w.m) @ w.w
    return model.mean + values if model.centered else values


def reconstruct_full(model: PcaModel, w: Weights, label: str = "") -> Spectrum:
    """Rebuild a spectrum from m PC weights; values may leave the reflectance range"""
    return Spectrum(
        grid=model.grid,
        values=reconstruct_array(model, w),
        label=label,
        check_range=False,
    )


def solve_weights_from_bands(
    model: PcaModel,
    sel: BandSelection,
    rho: ArrayLike,
    m: int,
    rtol: float = RANK_RTOL,
) -> Weights:
    """Least-squares weights from reflectance at k selected bands"""

    model.check_components(m)
    sel.check_grid(model.grid)
    rho = np.asarray(rho, dtype=np.float64).reshape(-1)
    if rho.size != sel.k:
        raise DataError(f"Got {rho.size} band values for {sel.k} selected bands")
    if sel.k < m:
        raise ConfigurationError(
            f"Under-determined band solve: {sel.k} bands for {m} components"
        )

    if sel.covers(model.grid):
        # the complete spectrum is known: plain projection
        return project_values(model, rho, m)

    idx = sel.index_array
    rows = model.components[idx, :m]
    target = rho - model.mean[idx] if model.centered else rho
    solution = pinv_solve(rows, target, rtol=rtol)
    if not solution.full_rank:
        logger.warning(
            f"Band matrix has rank {solution.rank} < {m} components "
            f"(smallest singular value {solution.singular_values[-1]:.3g}); "
            f"using the minimum-norm solution"
        )
    return Weights(solution.x, rank=solution.rank)


def reconstruct_from_bands(
    model: PcaModel,
    sel: BandSelection,
    rho: ArrayLike,
    m: int,
    label: str = "",
) -> Spectrum:
    """Whole spectrum from reflectance at the selected bands"""
    weights = solve_weights_from_bands(model, sel, rho, m)
    return reconstruct_full(model, weights, label=label)
