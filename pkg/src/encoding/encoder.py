"""
Convolve-and-threshold spike encoder.

Each kernel's convolution C^j[t] is scanned in time order against the
threshold C + sum M * (1 - age / delta) over same-kernel spikes with
0 <= age <= delta. A spike fires at the first sample where C^j[t] reaches the
threshold; the new spike's ahp term applies from that sample on.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal as sps

from src.encoding.models import SpikeTrain, ThresholdParams
from src.kernels.models import Kernel, KernelBank
from src.utils.validation import InputError, SignalValidator

ArrayLike = Union[float, int, np.ndarray]


def convolve(signal: np.ndarray, kernel: Kernel, method: str = "auto") -> np.ndarray:
    """
    C^j[t] = (1/fs) sum_u X[u] K_j[t - u] for t in [0, signal_len + support_len).

    The final sample is always zero; it is kept so every spike time lies inside
    the returned range.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size == 0:
        return np.zeros(0)
    full = sps.convolve(signal, kernel.samples, mode="full", method=method) / kernel.fs
    return np.concatenate([full, [0.0]])


def threshold_at(history: Sequence[int], t: ArrayLike, params: ThresholdParams,
                 fs: float) -> ArrayLike:
    """
    Model threshold at sample(s) t given one kernel's sorted spike times.

    Terms are accumulated in ascending spike order; encoder and decoder both
    call this function, so replayed values are bit-identical.
    """
    delta_s = params.delta_samples(fs)
    t_arr = np.asarray(t, dtype=np.float64)
    thr = np.full(t_arr.shape, float(params.C))

    hist = np.asarray(history, dtype=np.int64)
    if hist.size and t_arr.size:
        lo = np.searchsorted(hist, math.floor(float(t_arr.min()) - delta_s), side="left")
        hi = np.searchsorted(hist, float(t_arr.max()), side="right")
        for tp in hist[lo:hi]:
            age = t_arr - float(tp)
            thr = thr + np.where((age >= 0.0) & (age <= delta_s), params.M * (1.0 - age / delta_s), 0.0)

    if np.ndim(t) == 0:
        return float(thr)
    return thr


def replay_thresholds(kernel_ids: np.ndarray, times: np.ndarray, params: ThresholdParams,
                      fs: float) -> np.ndarray:
    """Recompute every spike's threshold from spike times alone."""
    kernel_ids = np.asarray(kernel_ids, dtype=np.int64)
    times = np.asarray(times, dtype=np.int64)
    out = np.empty(times.size, dtype=np.float64)
    for j in np.unique(kernel_ids):
        idx = np.flatnonzero(kernel_ids == j)
        kt = times[idx]
        for pos, i in enumerate(idx):
            out[i] = threshold_at(kt[:pos], int(kt[pos]), params, fs)
    return out


class SpikeEncoder:
    """
    Encodes signals against a kernel bank.

    Config keys (section `encoder`):
        store_measured: record C^j[t] instead of the model threshold
        method: scipy convolution method (auto | fft | direct)
    """

    def __init__(self, bank: KernelBank, params: ThresholdParams,
                 config: Dict[str, Any] = None, threads: int = 1):
        self.bank = bank
        self.params = params
        self.config = config or {}
        self.store_measured = bool(self.config.get("store_measured", False))
        self.method = self.config.get("method", "auto")
        self.threads = max(1, int(threads))
        self.logger = logging.getLogger("SPIKECODEC.Encoder")
        self.validator = SignalValidator(peak_limit=1.0, strict_mode=True)

    def check_signal(self, signal: np.ndarray) -> np.ndarray:
        """Reject NaN input; warn on over-range input or a violated stability flag."""
        signal = np.asarray(signal, dtype=np.float64)
        if signal.ndim != 1:
            raise InputError(f"expected a mono 1-D signal, got shape {signal.shape}")
        if np.any(np.isnan(signal)):
            raise InputError("signal contains NaN")
        self.validator.validate_finite(signal)
        self.validator.validate_peak(signal)

        if signal.size:
            peak = float(np.max(np.abs(signal)))
            tau_max = max(kernel.support_seconds for kernel in self.bank.kernels)
            if peak > 0 and not self.params.is_stable(peak, tau_max):
                self.logger.warning(
                    f"Stability flag violated: M={self.params.M} <= 2*{peak:.4f}*sqrt({tau_max:.5f}); "
                    f"interspike intervals may drop below delta/2"
                )
        return signal

    def scan_kernel(self, conv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Threshold-crossing scan of one convolution trace.

        Returns (spike times, model thresholds at those times).
        """
        params = self.params
        fs = self.bank.fs
        delta_s = params.delta_samples(fs)
        n = conv.size

        candidates = np.flatnonzero(conv >= params.C)
        times: List[int] = []
        thresholds: List[float] = []
        start = 0

        while True:
            pos = np.searchsorted(candidates, start, side="left")
            if pos >= candidates.size:
                break
            t = int(candidates[pos])

            if not times or t - times[-1] > delta_s:
                # no ahp term active, threshold is the baseline
                thresholds.append(threshold_at(times, t, params, fs))
                times.append(t)
                start = t + 1
                continue

            # ahp active: scan until the most recent spike's term expires
            end = max(t, min(n - 1, int(math.floor(times[-1] + delta_s))))
            seg = np.arange(t, end + 1)
            thr_seg = threshold_at(times, seg, params, fs)
            hits = np.flatnonzero(conv[t:end + 1] >= thr_seg)
            if hits.size:
                tf = t + int(hits[0])
                times.append(tf)
                thresholds.append(float(thr_seg[hits[0]]))
                start = tf + 1
            else:
                start = end + 1

        return np.asarray(times, dtype=np.int64), np.asarray(thresholds, dtype=np.float64)

    def encode_kernel(self, signal: np.ndarray, j: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(times, stored thresholds, convolution) for kernel j."""
        conv = convolve(signal, self.bank[j], method=self.method)
        times, thresholds = self.scan_kernel(conv)
        if self.store_measured and times.size:
            thresholds = conv[times].copy()
        return times, thresholds, conv

    def encode(self, signal: np.ndarray, signal_len: Optional[int] = None) -> SpikeTrain:
        signal = self.check_signal(signal)
        m = self.bank.m

        def run(j: int):
            times, thresholds, _ = self.encode_kernel(signal, j)
            return times, thresholds

        if self.threads > 1 and m > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                per_kernel = list(pool.map(run, range(m)))
        else:
            per_kernel = [run(j) for j in range(m)]

        times = np.concatenate([p[0] for p in per_kernel]) if per_kernel else np.zeros(0, np.int64)
        thresholds = np.concatenate([p[1] for p in per_kernel]) if per_kernel else np.zeros(0)
        kernel_ids = np.concatenate([np.full(p[0].size, j, dtype=np.int64) for j, p in enumerate(per_kernel)])

        order = np.lexsort((kernel_ids, times))
        train = SpikeTrain(
            kernel_ids[order], times[order], thresholds[order],
            fs=self.bank.fs,
            signal_len=int(signal.size if signal_len is None else signal_len),
            bank_hash=self.bank.bank_hash,
            params=self.params,
            measured=self.store_measured,
        )
        self.logger.info(
            f"Encoded {signal.size} samples with {m} kernels: {len(train)} spikes "
            f"({len(train) / max(train.duration, 1e-12):.1f} spikes/s)"
        )
        return train


def encode(signal: np.ndarray, bank: KernelBank, params: ThresholdParams,
           store_measured: bool = False, threads: int = 1, method: str = "auto") -> SpikeTrain:
    """Encode `signal` into a SpikeTrain."""
    encoder = SpikeEncoder(bank, params, {"store_measured": store_measured, "method": method}, threads=threads)
    return encoder.encode(signal)
