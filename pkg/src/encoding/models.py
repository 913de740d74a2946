"""
Encoding Models for SPIKECODEC.

ThresholdParams holds the after-hyperpolarization triple, Spike is a single
event and SpikeTrain is the sorted code produced by the encoder.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np

from src.utils.validation import ConfigError, InputError


@dataclass(frozen=True)
class ThresholdParams:
    """
    Threshold dynamics: baseline C, ahp jump M, refractory period delta (seconds).
    """
    C: float
    M: float
    delta: float

    def __post_init__(self):
        for name in ("C", "M", "delta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"threshold parameter {name} must be > 0, got {value}")

    def delta_samples(self, fs: float) -> float:
        return self.delta * fs

    def is_stable(self, amplitude_bound: float, tau_max: float) -> bool:
        """M > 2 * b * sqrt(tau_max) keeps per-kernel ISIs above delta / 2."""
        return self.M > 2.0 * amplitude_bound * math.sqrt(tau_max)

    def to_dict(self) -> Dict[str, float]:
        return {"C": self.C, "M": self.M, "delta": self.delta}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ThresholdParams":
        return cls(C=float(data["C"]), M=float(data["M"]), delta=float(data["delta"]))


@dataclass(frozen=True)
class Spike:
    """One event: kernel j fired at sample t with threshold value T."""
    kernel_id: int
    sample_index: int
    threshold: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel_id": self.kernel_id,
            "sample_index": self.sample_index,
            "threshold": self.threshold,
        }


@dataclass(eq=False)
class SpikeTrain:
    """
    Spikes sorted by (sample_index, kernel_id), stored column-wise.
    """
    kernel_ids: np.ndarray
    times: np.ndarray
    thresholds: np.ndarray
    fs: int
    signal_len: int
    bank_hash: int
    params: Optional[ThresholdParams] = None
    gain: float = 1.0
    measured: bool = False
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.kernel_ids = np.asarray(self.kernel_ids, dtype=np.int64).reshape(-1)
        self.times = np.asarray(self.times, dtype=np.int64).reshape(-1)
        self.thresholds = np.asarray(self.thresholds, dtype=np.float64).reshape(-1)
        n = self.kernel_ids.size
        if self.times.size != n or self.thresholds.size != n:
            raise InputError("spike train columns differ in length")
        if n:
            if self.times.min() < 0 or self.kernel_ids.min() < 0:
                raise InputError("spike train has negative kernel ids or times")
            dt = np.diff(self.times)
            dk = np.diff(self.kernel_ids)
            if np.any((dt < 0) | ((dt == 0) & (dk <= 0))):
                raise InputError("spike train must be sorted by (sample_index, kernel_id) without duplicates")

    @classmethod
    def empty(cls, fs: int, signal_len: int, bank_hash: int, **kwargs) -> "SpikeTrain":
        return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0), fs, signal_len, bank_hash, **kwargs)

    @classmethod
    def from_spikes(cls, spikes: List[Spike], fs: int, signal_len: int, bank_hash: int, **kwargs) -> "SpikeTrain":
        """Build from unsorted events; sorts by (sample_index, kernel_id)."""
        ordered = sorted(spikes, key=lambda s: (s.sample_index, s.kernel_id))
        return cls(
            np.array([s.kernel_id for s in ordered], dtype=np.int64),
            np.array([s.sample_index for s in ordered], dtype=np.int64),
            np.array([s.threshold for s in ordered], dtype=np.float64),
            fs, signal_len, bank_hash, **kwargs,
        )

    def __len__(self) -> int:
        return int(self.times.size)

    def __getitem__(self, i: int) -> Spike:
        return Spike(int(self.kernel_ids[i]), int(self.times[i]), float(self.thresholds[i]))

    def __iter__(self) -> Iterator[Spike]:
        for i in range(len(self)):
            yield self[i]

    @property
    def spikes(self) -> List[Spike]:
        return list(self)

    @property
    def duration(self) -> float:
        return self.signal_len / self.fs

    def kernel_times(self, j: int) -> np.ndarray:
        return self.times[self.kernel_ids == j]

    def subset(self, idx: np.ndarray) -> "SpikeTrain":
        """Train restricted to the (sorted) positions `idx`."""
        idx = np.asarray(idx, dtype=np.int64)
        return SpikeTrain(
            self.kernel_ids[idx], self.times[idx], self.thresholds[idx],
            self.fs, self.signal_len, self.bank_hash,
            params=self.params, gain=self.gain, measured=self.measured, meta=dict(self.meta),
        )

    def with_thresholds(self, thresholds: np.ndarray) -> "SpikeTrain":
        return SpikeTrain(
            self.kernel_ids, self.times, thresholds,
            self.fs, self.signal_len, self.bank_hash,
            params=self.params, gain=self.gain, measured=self.measured, meta=dict(self.meta),
        )

    def same_as(self, other: "SpikeTrain") -> bool:
        """Field-wise exact equality, thresholds compared bit for bit."""
        return (
            self.fs == other.fs
            and self.signal_len == other.signal_len
            and self.bank_hash == other.bank_hash
            and np.array_equal(self.kernel_ids, other.kernel_ids)
            and np.array_equal(self.times, other.times)
            and self.thresholds.tobytes() == other.thresholds.tobytes()
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spike_count": len(self),
            "fs": self.fs,
            "signal_len": self.signal_len,
            "bank_hash": f"{self.bank_hash:016x}",
            "params": self.params.to_dict() if self.params else None,
            "gain": self.gain,
            "measured": self.measured,
        }
