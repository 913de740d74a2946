"""
Projection-norm estimates of spikes onto spans of other spikes.

beta_past: norm of spike i's projection onto the spikes before it.
beta_all:  norm of spike i's projection onto every other spike.
"""

import logging
from typing import Optional

import numpy as np
from scipy import linalg as sla

from src.encoding.models import SpikeTrain
from src.gram.linalg import DEFAULT_RCOND, condition_estimate, svd_solve
from src.gram.system import assemble
from src.kernels.models import CorrTable

logger = logging.getLogger("SPIKECODEC.Gram")


def _past_projection_sq(P: np.ndarray, rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """
    Squared projection norms g_i' G_{i-1}^+ g_i via a pivot-skipping Cholesky.

    A spike whose residual pivot falls below rcond * P_ii lies in the span of
    its predecessors; it is left out of the factor, which leaves the span
    unchanged, matching the truncated pseudo-inverse.
    """
    n = P.shape[0]
    values = np.zeros(n)
    L = np.zeros((n, n))
    basis = []
    for i in range(n):
        if basis:
            g = P[basis, i]
            r = len(basis)
            ell = sla.solve_triangular(L[:r, :r], g, lower=True, check_finite=False)
            proj = float(ell @ ell)
        else:
            ell = np.zeros(0)
            proj = 0.0
        pivot = P[i, i] - proj
        values[i] = proj
        if pivot > rcond * P[i, i]:
            r = len(basis)
            L[r, :r] = ell
            L[r, r] = np.sqrt(pivot)
            basis.append(i)
    return values


def estimate_beta_past(spikes: SpikeTrain, table: CorrTable, upto: Optional[int] = None,
                       rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """
    Per-spike norm of the projection onto span{phi_0 .. phi_{i-1}}, for the
    first `upto` spikes, clamped to [0, 1].
    """
    n = len(spikes) if upto is None else int(upto)
    if n > len(spikes):
        raise ValueError(f"upto={n} exceeds spike count {len(spikes)}")
    P = assemble(spikes.subset(np.arange(n)), table).P
    return np.sqrt(np.clip(_past_projection_sq(P, rcond), 0.0, 1.0))


def _all_projection_sq(P: np.ndarray, rcond: float = DEFAULT_RCOND,
                       cond_limit: float = 1e12) -> np.ndarray:
    n = P.shape[0]
    if n <= 1:
        return np.zeros(n)

    if condition_estimate(P) <= cond_limit:
        try:
            factor = sla.cho_factor(P, lower=True, check_finite=False)
            inv_diag = np.diag(sla.cho_solve(factor, np.eye(n), check_finite=False))
            return np.diag(P) - 1.0 / inv_diag
        except np.linalg.LinAlgError:
            pass

    logger.warning(f"Gram of {n} spikes is singular or ill-conditioned; using per-spike SVD projections")
    values = np.zeros(n)
    for i in range(n):
        rest = np.delete(np.arange(n), i)
        G = P[np.ix_(rest, rest)]
        g = P[rest, i]
        c, _ = svd_solve(G, g, rcond)
        values[i] = float(g @ c)
    return values


def estimate_beta_all(spikes: SpikeTrain, table: CorrTable, rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """Per-spike norm of the projection onto the span of all other spikes, clamped to [0, 1]."""
    P = assemble(spikes, table).P
    return np.sqrt(np.clip(_all_projection_sq(P, rcond), 0.0, 1.0))
