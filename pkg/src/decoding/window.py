"""
Streaming windowed decoder.

Each incoming spike is orthogonalized against the last w accepted spikes only.
With c solving G_w c = g, the update adds
    k * (phi_new - sum_i c_i phi_i),   k = (T_new - sum_i c_i T_i) / (1 - g'c)
to the reconstruction. Updates are accumulated as per-spike coefficients and a
spike's waveform is written to the output once it leaves the window.
"""

import logging
import math
import time
from collections import deque
from dataclasses import dataclass
from typing import Any, Deque, Dict, Optional

import numpy as np
from scipy import linalg as sla

from src.decoding.batch import Reconstruction
from src.encoding.models import Spike, SpikeTrain
from src.gram.linalg import DEFAULT_COND_FALLBACK, DEFAULT_RCOND, SolveReport, svd_solve
from src.gram.system import gram_block
from src.kernels.models import CorrTable, KernelBank
from src.utils.logger import TraceWriter
from src.utils.validation import ConfigError, SequencingError

logger = logging.getLogger("SPIKECODEC.Decoder.Window")

DEFAULT_EPS = 1e-8
DEFAULT_MAX_WINDOW = 2048
WINDOW_HARD_CAP = 15000


@dataclass
class OrthoResult:
    c: np.ndarray
    norm_sq: float
    g: np.ndarray
    degenerate: bool
    condition_estimate: float
    method: str


def ortho_complement(kernel_id: int, sample_index: int, window_kernels: np.ndarray,
                     window_times: np.ndarray, gram_w: np.ndarray, table: CorrTable,
                     eps: float = DEFAULT_EPS, rcond: float = DEFAULT_RCOND,
                     cond_limit: float = DEFAULT_COND_FALLBACK) -> OrthoResult:
    """
    Coefficients of the new spike's projection onto the window spikes and the
    squared norm of its orthogonal complement, clamped at 0.

    Cholesky while the factor's diagonal-ratio estimate stays within
    cond_limit (the batch decoder's `cond_fallback`), truncated SVD beyond it.
    """
    if len(window_times) == 0:
        return OrthoResult(np.zeros(0), 1.0, np.zeros(0), False, 1.0, "empty")

    g = gram_block(table, window_kernels, window_times, [kernel_id], [sample_index])[:, 0]
    method = "cholesky"
    try:
        factor, lower = sla.cho_factor(gram_w, lower=True, check_finite=False)
        diag = np.abs(np.diag(factor))
        cond = float((diag.max() / diag.min()) ** 2) if diag.min() > 0 else math.inf
        if not math.isfinite(cond) or cond > cond_limit:
            raise np.linalg.LinAlgError("window Gram ill-conditioned")
        c = sla.cho_solve((factor, lower), g, check_finite=False)
    except np.linalg.LinAlgError:
        method = "svd"
        c, _ = svd_solve(gram_w, g, rcond)
        s = sla.svdvals(gram_w)
        cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf

    norm_sq = max(0.0, 1.0 - float(g @ c))
    return OrthoResult(c, norm_sq, g, norm_sq < eps, cond, method)


class WindowState:
    """
    Decoder state for one stream.

    window holds at most w accepted spikes in time order together with their
    accumulated coefficients; `out` receives a spike's contribution when it is
    evicted or when the stream is finalized.
    """

    def __init__(self, bank: KernelBank, table: CorrTable, w: int, out_len: int,
                 eps: float = DEFAULT_EPS, rcond: float = DEFAULT_RCOND,
                 trace: Optional[TraceWriter] = None, cond_limit: float = DEFAULT_COND_FALLBACK):
        if w < 1:
            raise ConfigError(f"window size must be >= 1, got {w}")
        self.bank = bank
        self.table = table
        self.w = int(w)
        self.eps = eps
        self.rcond = rcond
        self.cond_limit = cond_limit
        self.trace = trace or TraceWriter()
        self.out = np.zeros(int(out_len))
        self.kernels: Deque[int] = deque()
        self.times: Deque[int] = deque()
        self.thresholds: Deque[float] = deque()
        self.coeffs: Deque[float] = deque()
        self.indices: Deque[int] = deque()
        self.final_coeffs: Dict[int, float] = {}
        self.gram_w = np.zeros((0, 0))
        self.skipped = 0
        self.processed = 0
        self.svd_steps = 0
        self.max_condition_seen = 1.0
        self.last_time: Optional[int] = None

    @property
    def window(self):
        return list(zip(self.kernels, self.times, self.thresholds))

    def _flush_oldest(self) -> None:
        j, t, c = self.kernels.popleft(), self.times.popleft(), self.coeffs.popleft()
        self.thresholds.popleft()
        self.final_coeffs[self.indices.popleft()] = c
        self.bank.scatter(self.out, [j], [t], [c])
        self.gram_w = self.gram_w[1:, 1:]

    def push_spike(self, spike: Spike) -> OrthoResult:
        """Fold one spike into the reconstruction."""
        if self.last_time is not None and spike.sample_index < self.last_time:
            raise SequencingError(
                f"spike at sample {spike.sample_index} arrived after sample {self.last_time}"
            )
        self.last_time = spike.sample_index

        ortho = ortho_complement(
            spike.kernel_id, spike.sample_index,
            np.fromiter(self.kernels, dtype=np.int64, count=len(self.kernels)),
            np.fromiter(self.times, dtype=np.int64, count=len(self.times)),
            self.gram_w, self.table, self.eps, self.rcond, self.cond_limit,
        )
        self.max_condition_seen = max(self.max_condition_seen, ortho.condition_estimate)
        if ortho.method == "svd":
            self.svd_steps += 1

        if ortho.degenerate:
            self.skipped += 1
            logger.debug(f"Skipped degenerate spike k={spike.kernel_id} t={spike.sample_index} norm_sq={ortho.norm_sq:.3g}")
        else:
            c = ortho.c
            residual = spike.threshold - float(c @ np.fromiter(self.thresholds, dtype=np.float64, count=c.size))
            k = residual / ortho.norm_sq
            for i in range(c.size):
                self.coeffs[i] -= k * c[i]

            size = c.size
            grown = np.empty((size + 1, size + 1))
            grown[:size, :size] = self.gram_w
            grown[:size, size] = ortho.g
            grown[size, :size] = ortho.g
            grown[size, size] = 1.0
            self.gram_w = grown
            self.kernels.append(spike.kernel_id)
            self.times.append(spike.sample_index)
            self.thresholds.append(spike.threshold)
            self.coeffs.append(k)
            self.indices.append(self.processed)

            if len(self.times) > self.w:
                self._flush_oldest()

        if self.trace.enabled:
            self.trace.emit(
                "spike",
                index=self.processed,
                kernel=spike.kernel_id,
                sample=spike.sample_index,
                norm_sq=ortho.norm_sq,
                window=len(self.times),
                degenerate=ortho.degenerate,
                method=ortho.method,
                condition=ortho.condition_estimate,
            )
        self.processed += 1
        return ortho

    def current_output(self) -> np.ndarray:
        """Reconstruction so far, window contributions included, without flushing."""
        out = self.out.copy()
        return self.bank.scatter(out, list(self.kernels), list(self.times), list(self.coeffs))

    def finalize(self) -> np.ndarray:
        """Flush every remaining window coefficient into `out`."""
        while self.times:
            self._flush_oldest()
        return self.out

    def diagnostics(self) -> Dict[str, Any]:
        return {
            "window": self.w,
            "processed": self.processed,
            "skipped": self.skipped,
            "svd_steps": self.svd_steps,
            "max_condition_seen": self.max_condition_seen,
        }


def check_window(w: int, allow_large: bool = False, max_window: int = DEFAULT_MAX_WINDOW,
                 hard_cap: int = WINDOW_HARD_CAP) -> int:
    """Validate a window size against the configured limits."""
    w = int(w)
    if w < 1:
        raise ConfigError(f"window size must be >= 1, got {w}")
    if w > hard_cap:
        raise ConfigError(f"window size {w} exceeds the hard cap of {hard_cap}")
    if w > max_window and not allow_large:
        raise ConfigError(
            f"window size {w} exceeds {max_window}; pass --allow-large-window to accept O(w^3) steps this large"
        )
    return w


def stream_decode(spikes: SpikeTrain, bank: KernelBank, table: CorrTable, w: int,
                  config: Dict[str, Any] = None, allow_large: bool = False,
                  trace: Optional[TraceWriter] = None, out_len: Optional[int] = None) -> Reconstruction:
    """Windowed decode of a whole train."""
    config = config or {}
    w = check_window(
        w, allow_large,
        max_window=int(config.get("max_window", DEFAULT_MAX_WINDOW)),
        hard_cap=int(config.get("window_hard_cap", WINDOW_HARD_CAP)),
    )
    bank.check_hash(spikes.bank_hash)
    table.check_bank(spikes.bank_hash)

    started = time.perf_counter()
    state = WindowState(
        bank, table, w,
        out_len=spikes.signal_len if out_len is None else out_len,
        eps=float(config.get("degenerate_eps", DEFAULT_EPS)),
        rcond=float(config.get("svd_rcond", DEFAULT_RCOND)),
        trace=trace,
        cond_limit=float(config.get("cond_fallback", DEFAULT_COND_FALLBACK)),
    )
    for spike in spikes:
        state.push_spike(spike)
    samples = state.finalize()

    diagnostics = state.diagnostics()
    diagnostics["decode_ms"] = (time.perf_counter() - started) * 1e3
    if state.skipped:
        logger.warning(f"Windowed decode skipped {state.skipped} degenerate spikes")
    logger.info(
        f"Windowed decode: N={len(spikes)}, w={w}, skipped={state.skipped}, "
        f"max_cond={state.max_condition_seen:.3g}"
    )
    report = SolveReport(
        method="window" if state.svd_steps == 0 else "window+svd",
        rank=len(spikes) - state.skipped,
        condition_estimate=state.max_condition_seen,
    )
    alpha = np.zeros(len(spikes))
    for idx, coeff in state.final_coeffs.items():
        alpha[idx] = coeff
    return Reconstruction(samples=samples, alpha=alpha, solver_report=report, diagnostics=diagnostics)
