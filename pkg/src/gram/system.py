"""
Gram system assembly.

P[i, k] = <phi_i, phi_k> = rho_{j_i, j_k}(t_k - t_i), read from the
correlation table; T holds the spike thresholds.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.encoding.models import SpikeTrain
from src.kernels.models import CorrTable

logger = logging.getLogger("SPIKECODEC.Gram")


@dataclass(eq=False)
class GramSystem:
    """The linear system P alpha = T for one spike train."""
    P: np.ndarray
    T: np.ndarray
    spikes: SpikeTrain

    @property
    def n(self) -> int:
        return int(self.T.size)

    def min_eigenvalue(self) -> float:
        if self.n == 0:
            return 1.0
        return float(np.linalg.eigvalsh(self.P)[0])

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "nnz": int(np.count_nonzero(self.P))}


def gram_block(table: CorrTable, kernel_ids_a, times_a, kernel_ids_b, times_b) -> np.ndarray:
    """Cross Gram block G[a, b] = <phi_a, phi_b>."""
    ja = np.asarray(kernel_ids_a, dtype=np.int64)[:, None]
    ta = np.asarray(times_a, dtype=np.int64)[:, None]
    jb = np.asarray(kernel_ids_b, dtype=np.int64)[None, :]
    tb = np.asarray(times_b, dtype=np.int64)[None, :]
    return table.lookup(ja, jb, tb - ta)


def assemble(spikes: SpikeTrain, table: CorrTable) -> GramSystem:
    """
    Build P and T for a spike train.

    Raises:
        CompatibilityError: the train was encoded with a different bank
    """
    table.check_bank(spikes.bank_hash)
    P = gram_block(table, spikes.kernel_ids, spikes.times, spikes.kernel_ids, spikes.times)
    logger.debug(f"Assembled Gram system: N={len(spikes)}, nnz={int(np.count_nonzero(P))}")
    return GramSystem(P=P, T=spikes.thresholds.copy(), spikes=spikes)
