"""
SVD least squares

Generalized-inverse solves shared by the selected-band and lin-comb models.
Singular values below rtol * sigma_max count as zero, so rank-deficient
systems get the minimum-norm least-squares solution.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.core.errors import NumericalError

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class LeastSquaresSolution:
    x: NDArray[np.float64]
    rank: int
    singular_values: NDArray[np.float64]

    @property
    def full_rank(self) -> bool:
        return self.rank == self.x.shape[0]


def pinv_solve(A: NDArray[np.float64], b: NDArray[np.float64], rtol: float = RANK_RTOL) -> LeastSquaresSolution:
    """x = A+ b through a thresholded singular value decomposition"""

    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD did not converge: {e}") from e

    cutoff = rtol * s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > cutoff))
    coefficients = U[:, :rank].T @ b / s[:rank]
    x = Vt[:rank].T @ coefficients
    return LeastSquaresSolution(x=x, rank=rank, singular_values=s)
