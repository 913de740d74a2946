"""
Dense symmetric solves shared by the decoders and projection estimates.
"""

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from scipy import linalg as sla

DEFAULT_RCOND = 1e-10
DEFAULT_COND_FALLBACK = 1e12


@dataclass
class SolveReport:
    """Which path a solve took."""
    method: str
    rank: int
    condition_estimate: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "rank": self.rank,
            "condition_estimate": self.condition_estimate,
        }


def condition_estimate(P: np.ndarray) -> float:
    """2-norm condition number of a symmetric matrix from its eigenvalues."""
    if P.size == 0:
        return 1.0
    eig = sla.eigvalsh(P)
    lo, hi = float(eig[0]), float(eig[-1])
    if lo <= 0.0:
        return float("inf")
    return hi / lo


def svd_solve(A: np.ndarray, b: np.ndarray, rcond: float = DEFAULT_RCOND) -> Tuple[np.ndarray, int]:
    """
    Minimum-norm least-squares solution via truncated SVD.

    Singular values below rcond * sigma_max are dropped.
    """
    if A.size == 0:
        return np.zeros(A.shape[1] if A.ndim == 2 else 0), 0
    U, s, Vt = sla.svd(A, full_matrices=False)
    cutoff = rcond * s[0] if s.size else 0.0
    keep = s > cutoff
    rank = int(np.count_nonzero(keep))
    coeffs = (U[:, keep].T @ b) / s[keep]
    return Vt[keep].T @ coeffs, rank


def spd_solve(P: np.ndarray, b: np.ndarray, rcond: float = DEFAULT_RCOND,
              cond_limit: float = DEFAULT_COND_FALLBACK) -> Tuple[np.ndarray, SolveReport]:
    """
    Solve P x = b for a symmetric PSD P.

    Cholesky when P factors and its condition estimate is at most cond_limit,
    otherwise the truncated-SVD minimum-norm solution.
    """
    n = P.shape[0]
    if n == 0:
        return np.zeros(0), SolveReport("cholesky", 0, 1.0)

    cond = condition_estimate(P)
    if cond <= cond_limit:
        try:
            factor = sla.cho_factor(P, lower=True, check_finite=False)
            return sla.cho_solve(factor, b, check_finite=False), SolveReport("cholesky", n, cond)
        except np.linalg.LinAlgError:
            pass

    x, rank = svd_solve(P, b, rcond)
    return x, SolveReport("svd", rank, cond)
