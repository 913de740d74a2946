"""
Half-overlapped single-cycle sine spikes: a Gram matrix with closed-form inverse.

Adjacent spikes have inner product -1/2, all others 0, so P is the tridiagonal
matrix whose inverse is given by Chebyshev polynomials of the second kind.
"""

from dataclasses import dataclass

import numpy as np

from src.encoding.models import SpikeTrain
from src.gram.system import assemble
from src.kernels.bank import build_bank, cross_corr_table
from src.kernels.gammatone import sine_cycle_kernel
from src.kernels.models import CorrTable, KernelBank
from src.utils.validation import ConfigError


def chebyshev_inverse(n: int) -> np.ndarray:
    """
    Inverse of the (n-1)x(n-1) tridiagonal matrix with unit diagonal and -1/2
    off-diagonal: entry (i, j), 1-based, is 2 * min(i, j) * (n - max(i, j)) / n.
    """
    if n < 2:
        raise ConfigError(f"chebyshev_inverse needs n >= 2, got {n}")
    idx = np.arange(1, n)
    lo = np.minimum.outer(idx, idx)
    hi = np.maximum.outer(idx, idx)
    return 2.0 * lo * (n - hi) / n


def past_projection_sq(n: int) -> float:
    """Squared projection of chain spike n (1-based) onto its n-1 predecessors."""
    return (n - 1) / (2.0 * n)


def rest_projection_sq(N: int, n: int) -> float:
    """Squared projection of chain spike n onto the other N-1 spikes of an N-chain."""
    if not 1 <= n <= N:
        raise ConfigError(f"spike {n} outside chain of length {N}")
    return past_projection_sq(n) + past_projection_sq(N - n + 1)


@dataclass(eq=False)
class SineChain:
    bank: KernelBank
    table: CorrTable
    spikes: SpikeTrain
    P: np.ndarray
    closed_inverse: np.ndarray

    @property
    def kernel_len(self) -> int:
        return self.bank.max_support


def sine_chain(N: int, fs: int = 8000, cycles_hz: float = 100.0) -> SineChain:
    """
    N one-cycle sine spikes spaced half a cycle apart.

    The kernel length fs / cycles_hz must be an even integer of at least 4.
    """
    if N < 3:
        raise ConfigError(f"sine chain needs N >= 3, got {N}")
    length = fs / cycles_hz
    if abs(length - round(length)) > 1e-9 or int(round(length)) % 2 or length < 4:
        raise ConfigError(f"fs / cycles_hz = {length} must be an even integer >= 4")
    length = int(round(length))

    bank = build_bank([sine_cycle_kernel(length, fs)], fs)
    table = cross_corr_table(bank)
    half = length // 2
    times = (length - 1) + half * np.arange(N)
    spikes = SpikeTrain(
        kernel_ids=np.zeros(N, dtype=np.int64),
        times=times,
        thresholds=np.ones(N),
        fs=fs,
        signal_len=int(times[-1] + 1),
        bank_hash=bank.bank_hash,
    )
    system = assemble(spikes, table)
    return SineChain(bank=bank, table=table, spikes=spikes, P=system.P,
                     closed_inverse=chebyshev_inverse(N + 1))
