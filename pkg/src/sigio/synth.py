"""
Synthetic signals in the span of the kernel bank.

A SynthSpec lists (kernel_id, time, coeff) components; the signal is the sum of
coeff-scaled spike waveforms and its forced thresholds are <X, phi_p>, the
values a spike at each component would have to carry for exact recovery.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.encoding.models import SpikeTrain
from src.kernels.models import KernelBank
from src.utils.validation import ConfigError


@dataclass
class SynthSpec:
    components: List[Tuple[int, int, float]] = field(default_factory=list)
    length: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ConfigError(f"synth length must be >= 0, got {self.length}")
        for kernel_id, t, coeff in self.components:
            if not 0 <= int(t) < self.length:
                raise ConfigError(f"component time {t} outside [0, {self.length})")
            if not math.isfinite(coeff):
                raise ConfigError("component coefficients must be finite")

    @property
    def kernel_ids(self) -> np.ndarray:
        return np.array([c[0] for c in self.components], dtype=np.int64)

    @property
    def times(self) -> np.ndarray:
        return np.array([c[1] for c in self.components], dtype=np.int64)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c[2] for c in self.components], dtype=np.float64)


def synth_in_span(spec: SynthSpec, bank: KernelBank) -> Tuple[np.ndarray, np.ndarray]:
    """
    (samples, forced thresholds) for a spec.

    Raises:
        ConfigError: a component names a kernel outside the bank
    """
    kernel_ids = spec.kernel_ids
    if kernel_ids.size and (kernel_ids.min() < 0 or kernel_ids.max() >= bank.m):
        raise ConfigError(f"component kernel id outside 0..{bank.m - 1}")
    samples = bank.scatter(np.zeros(spec.length), kernel_ids, spec.times, spec.coeffs)
    forced = np.array([
        float(samples @ bank.waveform(int(j), int(t), spec.length)) / bank.fs
        for j, t in zip(kernel_ids, spec.times)
    ])
    return samples, forced


def forced_spike_train(spec: SynthSpec, bank: KernelBank, thresholds: Optional[np.ndarray] = None) -> SpikeTrain:
    """Spike train with one spike per component carrying its forced threshold."""
    if thresholds is None:
        _, thresholds = synth_in_span(spec, bank)
    order = np.lexsort((spec.kernel_ids, spec.times))
    return SpikeTrain(
        spec.kernel_ids[order], spec.times[order], np.asarray(thresholds)[order],
        fs=bank.fs, signal_len=spec.length, bank_hash=bank.bank_hash,
    )


def synth_random_spec(bank: KernelBank, length: int, count: int, seed: int = 0,
                      coeff_scale: float = 1.0) -> SynthSpec:
    """
    `count` distinct random components whose supports lie inside [0, length).
    """
    rng = np.random.default_rng(seed)
    supports = bank.supports
    if length < int(supports.max()):
        raise ConfigError(f"length {length} shorter than the longest kernel ({int(supports.max())})")

    chosen = set()
    components = []
    attempts = 0
    while len(components) < count:
        attempts += 1
        if attempts > 100 * max(count, 1):
            raise ConfigError(f"could not place {count} distinct components in {length} samples")
        j = int(rng.integers(bank.m))
        t = int(rng.integers(supports[j] - 1, length))
        if (j, t) in chosen:
            continue
        chosen.add((j, t))
        coeff = float(rng.normal(scale=coeff_scale))
        components.append((j, t, coeff))
    return SynthSpec(components=components, length=length)


def synth_signal(bank: KernelBank, length: int, count: int, seed: int = 0) -> np.ndarray:
    """Random in-span signal scaled to peak amplitude 1."""
    samples, _ = synth_in_span(synth_random_spec(bank, length, count, seed), bank)
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    return samples / peak if peak > 0 else samples
