"""
Kernel waveform synthesis: gammatones, ERB spacing and simple test shapes.

ERB constants follow the Glasberg & Moore parameterization used by Slaney's
auditory toolbox.
"""

import logging
import math
from typing import Optional

import numpy as np

from src.kernels.models import Kernel
from src.utils.validation import AliasingError, ConfigError, DegenerateKernelError

EAR_Q = 9.26449
MIN_BW = 24.7
BANDWIDTH_SCALE = 1.019

logger = logging.getLogger("SPIKECODEC.Kernels")


def erb(f_center: float) -> float:
    """Equivalent rectangular bandwidth in Hz."""
    return MIN_BW * (4.37 * f_center / 1000.0 + 1.0)


def erb_bandwidth(f_center: float) -> float:
    """Default gammatone bandwidth b = 1.019 * ERB(f)."""
    return BANDWIDTH_SCALE * erb(f_center)


def erb_space(low_hz: float, high_hz: float, count: int) -> np.ndarray:
    """
    `count` center frequencies uniformly spaced on the ERB-rate scale over
    [low_hz, high_hz], ascending, both endpoints included.
    """
    if count < 1:
        raise ConfigError("erb_space needs count >= 1")
    if not 0 < low_hz <= high_hz:
        raise ConfigError(f"invalid ERB range [{low_hz}, {high_hz}]")
    if count == 1:
        return np.array([float(low_hz)])
    offset = EAR_Q * MIN_BW
    lo = math.log(low_hz + offset)
    hi = math.log(high_hz + offset)
    return np.exp(np.linspace(lo, hi, count)) - offset


def _envelope_support(order: int, bandwidth: float, fs: float, trunc_rel: float) -> int:
    """Samples until the envelope t^(n-1) e^(-2 pi b t) falls below trunc_rel * peak."""
    rate = 2.0 * math.pi * bandwidth
    t_peak = (order - 1) / rate
    length = max(8, int(math.ceil(fs * (t_peak + 4.0 / rate))))
    log_floor = math.log(trunc_rel)

    while True:
        t = np.arange(length) / fs
        with np.errstate(divide="ignore"):
            log_env = (order - 1) * np.log(t) - rate * t if order > 1 else -rate * t
        peak_idx = int(np.argmax(log_env))
        rel = log_env - log_env[peak_idx]
        below = np.nonzero(rel[peak_idx:] < log_floor)[0]
        if below.size:
            return peak_idx + int(below[0])
        length *= 2


def make_gammatone(f_center: float, order: int = 4, bandwidth: Optional[float] = None,
                   phase: float = 0.0, fs: int = 44100, trunc_rel: float = 1e-4,
                   id: int = 0) -> Kernel:
    """
    Sampled gammatone t^(n-1) e^(-2 pi b t) cos(2 pi f t + phase), truncated and
    normalized.

    Raises:
        AliasingError: f_center >= fs/2
        DegenerateKernelError: truncation leaves fewer than 2 samples
    """
    if f_center >= fs / 2:
        raise AliasingError(f"gammatone center {f_center} Hz at or above Nyquist {fs / 2} Hz")
    if f_center <= 0:
        raise ConfigError(f"gammatone center must be positive, got {f_center}")
    if order < 1:
        raise ConfigError(f"gammatone order must be >= 1, got {order}")
    if bandwidth is None:
        bandwidth = erb_bandwidth(f_center)
    if bandwidth <= 0:
        raise ConfigError(f"gammatone bandwidth must be positive, got {bandwidth}")
    if not 0 < trunc_rel < 1:
        raise ConfigError(f"trunc_rel must be in (0, 1), got {trunc_rel}")

    length = _envelope_support(order, bandwidth, fs, trunc_rel)
    if length < 2:
        raise DegenerateKernelError(
            f"gammatone f={f_center} b={bandwidth} truncates to {length} sample(s) at fs={fs}"
        )

    t = np.arange(length) / fs
    envelope = t ** (order - 1) * np.exp(-2.0 * math.pi * bandwidth * t)
    waveform = envelope * np.cos(2.0 * math.pi * f_center * t + phase)
    if not np.any(waveform):
        raise DegenerateKernelError(f"gammatone f={f_center} sampled to all zeros")

    label = f"gammatone f={f_center:g} n={order} b={bandwidth:g} phase={phase:g}"
    logger.debug(f"Built {label} with support {length} samples")
    return Kernel.from_waveform(id, waveform, fs, label=label)


def rect_kernel(length: int, fs: int, id: int = 0) -> Kernel:
    """Rectangular pulse of `length` samples."""
    if length < 1:
        raise DegenerateKernelError("rectangular kernel needs length >= 1")
    return Kernel.from_waveform(id, np.ones(length), fs, label=f"rect len={length}")


def sine_cycle_kernel(length: int, fs: int, id: int = 0) -> Kernel:
    """One full sine cycle over `length` samples (even length keeps half-cycles exact)."""
    if length < 2:
        raise DegenerateKernelError("sine kernel needs length >= 2")
    waveform = np.sin(2.0 * math.pi * np.arange(length) / length)
    return Kernel.from_waveform(id, waveform, fs, label=f"sine len={length}")
