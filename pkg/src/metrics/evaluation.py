"""
Reconstruction quality and spike-rate metrics.

Rates are reported as a fraction of fs itself ("Nyquist fraction"): a train of
fs/5 spikes per second has nyquist_fraction 0.2, whatever the signal bandwidth.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np

from src.decoding.batch import Reconstruction
from src.encoding.models import SpikeTrain, ThresholdParams
from src.kernels.models import KernelBank
from src.utils.validation import DomainError, InputError, SignalValidator, UndefinedSNRError

logger = logging.getLogger("SPIKECODEC.Metrics")

PERFECT_SNR_DB = 80.0


def snr(reference: np.ndarray, estimate: np.ndarray) -> float:
    """10 log10(||X||^2 / ||X - X*||^2) in dB; +inf when the error is exactly zero."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise InputError(f"snr length mismatch: {reference.size} vs {estimate.size}")
    signal_energy = float(np.dot(reference, reference))
    if signal_energy == 0.0:
        raise UndefinedSNRError("SNR is undefined for an all-zero reference")
    diff = reference - estimate
    error_energy = float(np.dot(diff, diff))
    if error_energy == 0.0:
        return math.inf
    return 10.0 * math.log10(signal_energy / error_energy)


def approx_error_bound(delta: float, gamma: float, lipschitz: float, x_max: float, eta: float) -> float:
    """
    Relative squared-error bound (delta + lipschitz * gamma)^2 (x_max + 1) / (1 - eta)
    for a signal approximated within delta by the kernel span and spike times
    jittered by up to gamma seconds. Diagnostic only.
    """
    for name, value in (("delta", delta), ("gamma", gamma), ("lipschitz", lipschitz),
                        ("x_max", x_max), ("eta", eta)):
        if value < 0 or not math.isfinite(value):
            raise DomainError(f"{name} must be finite and >= 0, got {value}")
    if eta >= 1.0:
        raise DomainError(f"eta must be < 1 for the frame condition, got {eta}")
    return (delta + lipschitz * gamma) ** 2 * (x_max + 1.0) / (1.0 - eta)


def max_spike_count(m: int, params: ThresholdParams, fs: int, span_samples: int) -> float:
    """
    Most spikes m kernels can emit over span_samples when consecutive spikes
    of a kernel are more than delta/2 apart: m * (2 * span / delta + 1).
    """
    delta_s = params.delta_samples(fs)
    return m * (2.0 * span_samples / delta_s + 1.0)


def per_kernel_min_isi(spikes: SpikeTrain) -> Optional[int]:
    """Smallest gap between consecutive same-kernel spikes, None if no kernel fired twice."""
    best = None
    for j in np.unique(spikes.kernel_ids):
        times = spikes.kernel_times(int(j))
        if times.size > 1:
            gap = int(np.min(np.diff(times)))
            best = gap if best is None else min(best, gap)
    return best


def overlap_similarity(bank: KernelBank, j: int, k: int, lag: int) -> float:
    """
    |<a, b_tail>| / (||a|| ||b_tail||) for spike a (kernel j at 0) and the part
    of spike b (kernel k at `lag`) lying inside a's support.
    """
    origin = bank[j].support_len - 1
    length = origin + max(lag, 0) + 1
    a = bank.waveform(j, origin, length)
    b = bank.waveform(k, origin + lag, length)
    b[origin + 1:] = 0.0
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return abs(float(a @ b)) / denom


@dataclass
class EvalReport:
    """One run's quality and rate summary."""
    snr_db: Optional[float]
    spike_count: int
    spikes_per_second: float
    nyquist_fraction: float
    min_isi_samples: Optional[int] = None
    snr_defined: bool = True
    perfect: bool = False
    params: Dict[str, Any] = field(default_factory=dict)
    runtime_ms: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        snr_value: Union[float, str, None] = self.snr_db
        if snr_value is not None and math.isinf(snr_value):
            snr_value = "inf"
        return {
            "snr_db": snr_value,
            "snr_defined": self.snr_defined,
            "perfect": self.perfect,
            "spike_count": self.spike_count,
            "spikes_per_second": self.spikes_per_second,
            "nyquist_fraction": self.nyquist_fraction,
            "min_isi_samples": self.min_isi_samples,
            "params": dict(self.params),
            "runtime_ms": dict(self.runtime_ms),
        }


def evaluate(signal: np.ndarray, spikes: SpikeTrain,
             reconstruction: Union[Reconstruction, np.ndarray],
             params: Optional[Dict[str, Any]] = None,
             runtime_ms: Optional[Dict[str, float]] = None,
             perfect_db: float = PERFECT_SNR_DB) -> EvalReport:
    """Compute every EvalReport field for one encode/decode run."""
    signal = np.asarray(signal, dtype=np.float64)
    samples = reconstruction.samples if isinstance(reconstruction, Reconstruction) else np.asarray(reconstruction)
    SignalValidator(strict_mode=True).validate_lengths(signal, samples, context="evaluate")

    try:
        snr_db: Optional[float] = snr(signal, samples)
        defined = True
    except UndefinedSNRError:
        snr_db, defined = None, False

    duration = signal.size / spikes.fs if spikes.fs else 0.0
    rate = len(spikes) / duration if duration > 0 else 0.0
    echo = dict(params or {})
    if not echo and spikes.params is not None:
        echo = spikes.params.to_dict()

    report = EvalReport(
        snr_db=snr_db,
        spike_count=len(spikes),
        spikes_per_second=rate,
        nyquist_fraction=rate / spikes.fs if spikes.fs else 0.0,
        min_isi_samples=per_kernel_min_isi(spikes),
        snr_defined=defined,
        perfect=bool(defined and snr_db >= perfect_db),
        params=echo,
        runtime_ms=dict(runtime_ms or {}),
    )
    logger.debug(f"Evaluated run: {report.to_dict()}")
    return report
