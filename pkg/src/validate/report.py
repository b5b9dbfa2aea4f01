from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple
import logging

import numpy as np
from numpy.typing import NDArray

from src.core.errors import DataError, NumericalError
from src.reconstruct.lincomb import LinCombModel
from src.validate.metrics import (
    RELATIVE_ERROR_FLOOR,
    mean_absolute_error,
    norm_ratio_error,
    r_squared,
    relative_errors,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProtocolDescriptor:
    """What was evaluated: mode, dataset, components, bands, centering"""

    mode: str  # full | bands | lincomb | in-sample
    dataset: str
    n_samples: int
    components: Optional[int] = None
    centering: Optional[str] = None
    bands_nm: Tuple[float, ...] = ()
    target_nm: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "dataset": self.dataset,
            "n_samples": self.n_samples,
            "components": self.components,
            "centering": self.centering,
            "bands_nm": list(self.bands_nm),
            "target_nm": self.target_nm,
        }


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    """Per-sample and pooled errors of one evaluation protocol"""

    protocol: ProtocolDescriptor
    labels: Tuple[str, ...]
    wavelengths_nm: NDArray[np.float64]  # columns of truth / recon
    truth: NDArray[np.float64]  # n x L
    recon: NDArray[np.float64]  # n x L
    relative_errors: NDArray[np.float64]
    absolute_errors: NDArray[np.float64]
    norm_ratio_errors: NDArray[np.float64]
    sample_r_squared: NDArray[np.float64]
    excluded: NDArray[np.int64]
    r_squared: float
    mean_relative_error: float
    mean_absolute_error: float
    mean_norm_ratio_error: float
    rank_deficient: int = 0
    lincomb: Optional[LinCombModel] = field(default=None)

    @property
    def residuals(self) -> NDArray[np.float64]:
        """Residual vectors (truth - reconstruction), one row per sample"""
        return self.truth - self.recon

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def total_excluded(self) -> int:
        return int(self.excluded.sum())

    def mean_truth(self) -> NDArray[np.float64]:
        return self.truth.mean(axis=0)

    def mean_recon(self) -> NDArray[np.float64]:
        return self.recon.mean(axis=0)

    def pooled(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Pooled (truth, reconstruction) pairs, sample-major"""
        return self.truth.reshape(-1), self.recon.reshape(-1)

    def summary(self) -> Dict[str, Any]:
        return {
            **self.protocol.to_dict(),
            "mean_relative_error": self.mean_relative_error,
            "mean_absolute_error": self.mean_absolute_error,
            "mean_norm_ratio_error": self.mean_norm_ratio_error,
            "r_squared": self.r_squared,
            "excluded_points": self.total_excluded,
            "rank_deficient_solves": self.rank_deficient,
        }


def build_report(
    protocol: ProtocolDescriptor,
    labels: Sequence[str],
    wavelengths_nm: Sequence[float],
    truth: NDArray[np.float64],
    recon: NDArray[np.float64],
    floor: float = RELATIVE_ERROR_FLOOR,
    rank_deficient: int = 0,
    lincomb: Optional[LinCombModel] = None,
) -> ReconstructionReport:
    """Score truth against reconstruction row by row and pooled"""

    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    recon = np.atleast_2d(np.asarray(recon, dtype=np.float64))
    if truth.shape != recon.shape:
        raise DataError(f"Truth {truth.shape} and reconstruction {recon.shape} differ in shape")

    n = truth.shape[0]
    rel = np.full(n, np.nan)
    absolute = np.empty(n)
    ratio = np.full(n, np.nan)
    sample_r2 = np.full(n, np.nan)
    excluded = np.zeros(n, dtype=np.int64)

    for i in range(n):
        errors, excluded[i] = relative_errors(truth[i], recon[i], floor)
        if excluded[i] < errors.size:
            rel[i] = np.nanmean(errors)
        absolute[i] = mean_absolute_error(truth[i], recon[i])
        if np.any(truth[i]):
            ratio[i] = norm_ratio_error(truth[i], recon[i])
        if truth.shape[1] > 1:
            try:
                sample_r2[i] = r_squared(truth[i], recon[i])
            except NumericalError:
                pass

    if truth.shape[1] > 1 and np.any(np.isnan(rel)):
        bad = labels[int(np.argmax(np.isnan(rel)))]
        raise DataError(f"Sample '{bad}' has true reflectance below {floor} at every wavelength")
    if np.all(np.isnan(rel)):
        raise DataError(f"Every true value is below the relative-error floor {floor}")

    t, r = truth.reshape(-1), recon.reshape(-1)
    report = ReconstructionReport(
        protocol=protocol,
        labels=tuple(labels),
        wavelengths_nm=np.asarray(wavelengths_nm, dtype=np.float64),
        truth=truth,
        recon=recon,
        relative_errors=rel,
        absolute_errors=absolute,
        norm_ratio_errors=ratio,
        sample_r_squared=sample_r2,
        excluded=excluded,
        r_squared=r_squared(t, r),
        mean_relative_error=float(np.nanmean(rel)),
        mean_absolute_error=float(absolute.mean()),
        mean_norm_ratio_error=float(np.nanmean(ratio)) if not np.all(np.isnan(ratio)) else float("nan"),
        rank_deficient=rank_deficient,
        lincomb=lincomb,
    )
    logger.debug(
        f"{protocol.mode} report on '{protocol.dataset}': "
        f"mean relative error {report.mean_relative_error:.4g}, R2 {report.r_squared:.4g}"
    )
    return report
