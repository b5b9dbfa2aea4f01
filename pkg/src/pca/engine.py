"""
PCA engine

Mean, covariance, symmetric eigendecomposition with a deterministic order
and sign convention, and cumulative contribution rates.
"""

from dataclasses import dataclass
from typing import Tuple, Union
import logging

import numpy as np
from numpy.typing import NDArray
import scipy.linalg

from src.core.errors import DataError, NumericalError
from src.core.spectra import SpectralDataset
from src.pca.model import Centering, PcaModel

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Sample covariance over wavelengths (d x d, symmetric)"""

    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DataError(f"Covariance must be square, got shape {entries.shape}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True, eq=False)
class ContributionCurve:
    """v[m-1] is the variance fraction carried by the first m components"""

    v: NDArray[np.float64]

    def at(self, m: int) -> float:
        if not 1 <= m <= self.v.size:
            raise DataError(f"m must be in [1, {self.v.size}], got {m}")
        return float(self.v[m - 1])


def compute_mean(ds: SpectralDataset) -> NDArray[np.float64]:
    """Elementwise mean spectrum"""
    if ds.n < 1:
        raise DataError("Cannot average an empty dataset")
    return ds.matrix.mean(axis=0)


def compute_covariance(ds: SpectralDataset) -> CovarianceMatrix:
    """Sample covariance with divisor n - 1"""

    ds.require_samples(2, "Covariance")
    deviations = ds.matrix - compute_mean(ds)
    entries = deviations.T @ deviations / (ds.n - 1)
    # exact symmetry: both triangles from the same sums
    entries = 0.5 * (entries + entries.T)
    return CovarianceMatrix(entries)


def _apply_sign_convention(components: NDArray[np.float64]) -> NDArray[np.float64]:
    """Flip each column so its largest-magnitude entry is positive"""
    # argmax returns the first (lowest) index on ties
    pivots = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[pivots, np.arange(components.shape[1])])
    signs[signs == 0] = 1.0
    return components * signs


def eigendecompose(
    C: Union[CovarianceMatrix, NDArray[np.float64]],
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Descending eigenvalues and sign-normalized orthonormal eigenvectors"""

    entries = C.entries if isinstance(C, CovarianceMatrix) else np.asarray(C, dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DataError(f"Covariance must be square, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise DataError("Covariance contains non-finite entries")

    scale = float(np.max(np.abs(entries))) if entries.size else 0.0
    asymmetry = float(np.max(np.abs(entries - entries.T))) if entries.size else 0.0
    if asymmetry > SYMMETRY_TOLERANCE * max(scale, np.finfo(float).tiny):
        raise DataError(f"Covariance is not symmetric (max asymmetry {asymmetry:.3g})")

    try:
        values, vectors = scipy.linalg.eigh(entries, driver="evd")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Eigensolver failed: {e}") from e

    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    top = max(float(values[0]), 0.0)
    floor = -PSD_TOLERANCE * top
    if values[-1] < floor:
        raise NumericalError(
            f"Covariance is not positive semidefinite (eigenvalue {values[-1]:.3g}, "
            f"largest {top:.3g})"
        )
    values = np.where(values < 0, 0.0, values)

    return values, _apply_sign_convention(vectors)


def contribution(eigenvalues: NDArray[np.float64]) -> ContributionCurve:
    """Cumulative contribution rate of the first m components, for every m"""

    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if eigenvalues.size == 0:
        raise DataError("No eigenvalues")
    if np.any(np.diff(eigenvalues) > 0):
        raise DataError("Eigenvalues must be sorted in descending order")

    prefix = np.cumsum(eigenvalues)
    total = prefix[-1]
    if not total > 0:
        raise NumericalError("All eigenvalues are zero: the dataset has no variance")
    return ContributionCurve(prefix / total)


def fit(ds: SpectralDataset, centering: Centering = Centering.CENTERED) -> PcaModel:
    """Fit a PcaModel: mean, covariance, eigendecomposition"""

    ds.require_samples(2, "PCA")
    mean = compute_mean(ds)
    eigenvalues, components = eigendecompose(compute_covariance(ds))
    model = PcaModel(
        grid=ds.grid,
        mean=mean,
        eigenvalues=eigenvalues,
        components=components,
        centering=Centering(centering),
    )
    logger.debug(
        f"Fitted PCA on '{ds.name}' ({ds.n} spectra, {model.d} bands, {model.centering.value})"
    )
    return model
