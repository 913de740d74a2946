"""
Offline minimum-norm decoder.

Solves P alpha = T over the full spike train and synthesizes
X* = sum_i alpha_i * K_{j_i}[t_i - u]. Kept as the exact reference for the
streaming decoder.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.encoding.models import SpikeTrain
from src.gram.linalg import DEFAULT_COND_FALLBACK, DEFAULT_RCOND, SolveReport, spd_solve
from src.gram.system import GramSystem, assemble
from src.kernels.models import CorrTable, KernelBank
from src.utils.validation import BatchSizeError, InputError, check_finite_vector

logger = logging.getLogger("SPIKECODEC.Decoder.Batch")

DEFAULT_BATCH_CAP = 20000


@dataclass(eq=False)
class Reconstruction:
    samples: np.ndarray
    alpha: np.ndarray
    solver_report: SolveReport
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "length": int(self.samples.size),
            "spike_count": int(self.alpha.size),
            "solver_report": self.solver_report.to_dict(),
            "diagnostics": dict(self.diagnostics),
        }


def solve_coefficients(system: GramSystem, rcond: float = DEFAULT_RCOND,
                       cond_limit: float = DEFAULT_COND_FALLBACK) -> Tuple[np.ndarray, SolveReport]:
    """
    alpha with P alpha = T: Cholesky, or the minimum-norm SVD solution when P
    does not factor or is worse conditioned than cond_limit.
    """
    T = check_finite_vector(system.T, "thresholds", InputError)
    alpha, report = spd_solve(system.P, T, rcond=rcond, cond_limit=cond_limit)
    if report.method == "svd":
        logger.warning(
            f"Gram system (N={system.n}) fell back to SVD: cond={report.condition_estimate:.3g}, rank={report.rank}"
        )
    return alpha, report


def reconstruct(spikes: SpikeTrain, alpha: np.ndarray, bank: KernelBank,
                out_len: Optional[int] = None, report: Optional[SolveReport] = None) -> Reconstruction:
    """Scatter alpha-scaled spike waveforms into a buffer of out_len samples."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.size != len(spikes):
        raise InputError(f"alpha has {alpha.size} entries for {len(spikes)} spikes")
    out_len = spikes.signal_len if out_len is None else int(out_len)
    out = bank.scatter(np.zeros(out_len), spikes.kernel_ids, spikes.times, alpha)
    report = report or SolveReport("cholesky", int(alpha.size), 1.0)
    return Reconstruction(samples=out, alpha=alpha, solver_report=report)


class BatchDecoder:
    """
    Config keys (section `decoder`):
        batch_cap, svd_rcond, cond_fallback
    """

    def __init__(self, bank: KernelBank, table: CorrTable, config: Dict[str, Any] = None):
        self.bank = bank
        self.table = table
        self.config = config or {}
        self.batch_cap = int(self.config.get("batch_cap", DEFAULT_BATCH_CAP))
        self.rcond = float(self.config.get("svd_rcond", DEFAULT_RCOND))
        self.cond_limit = float(self.config.get("cond_fallback", DEFAULT_COND_FALLBACK))
        self.logger = logger

    def decode(self, spikes: SpikeTrain, out_len: Optional[int] = None) -> Reconstruction:
        if len(spikes) > self.batch_cap:
            raise BatchSizeError(
                f"batch decode of {len(spikes)} spikes exceeds the cap of {self.batch_cap}; "
                f"use the windowed decoder (--window) instead"
            )
        self.bank.check_hash(spikes.bank_hash)
        started = time.perf_counter()
        system = assemble(spikes, self.table)
        alpha, report = solve_coefficients(system, self.rcond, self.cond_limit)
        result = reconstruct(spikes, alpha, self.bank, out_len, report)
        result.diagnostics["decode_ms"] = (time.perf_counter() - started) * 1e3
        self.logger.info(f"Batch decode: N={len(spikes)}, method={report.method}, cond={report.condition_estimate:.3g}")
        return result


def decode(spikes: SpikeTrain, bank: KernelBank, table: CorrTable,
           config: Dict[str, Any] = None, out_len: Optional[int] = None) -> Reconstruction:
    """assemble -> solve_coefficients -> reconstruct."""
    return BatchDecoder(bank, table, config).decode(spikes, out_len)
