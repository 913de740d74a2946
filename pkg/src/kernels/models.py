"""
Kernel Models for SPIKECODEC.

Defines Kernel, KernelBank and CorrTable. All three are immutable after
construction and safe to share across threads.

Inner products use the sampled metric <f, g> = (1/fs) * sum(f * g), so a
normalized kernel has rho_jj(0) = 1 and |C^j| <= b * sqrt(support_len / fs).
"""

import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from src.utils.validation import ConfigError, CompatibilityError

NORM_TOLERANCE = 1e-10


def sampled_norm(samples: np.ndarray, fs: float) -> float:
    """L2 norm under the (1/fs)-scaled sampled metric."""
    samples = np.asarray(samples, dtype=np.float64)
    return float(np.sqrt(np.dot(samples, samples) / fs))


def normalize_waveform(samples: Sequence[float], fs: float) -> np.ndarray:
    """Scale a waveform to unit sampled norm. Zero waveforms are rejected."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("kernel waveform must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("kernel waveform contains non-finite samples")
    norm = sampled_norm(arr, fs)
    if norm == 0.0:
        raise ConfigError("kernel waveform is identically zero")
    return arr / norm


@dataclass(frozen=True, eq=False)
class Kernel:
    """
    One encoding neuron's receptive field.

    `samples` holds the normalized waveform; spike i with kernel j at time t_i
    contributes the inverted shifted copy samples[t_i - u] at sample u.
    """
    id: int
    samples: np.ndarray
    fs: int
    label: str = ""

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 1:
            raise ConfigError(f"kernel {self.id}: support_len must be >= 1")
        if not np.all(np.isfinite(samples)):
            raise ConfigError(f"kernel {self.id}: non-finite samples")
        if self.fs <= 0:
            raise ConfigError(f"kernel {self.id}: fs must be positive")
        norm = sampled_norm(samples, self.fs)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ConfigError(f"kernel {self.id}: norm {norm!r} is not 1")

    @classmethod
    def from_waveform(cls, id: int, samples: Sequence[float], fs: int, label: str = "") -> "Kernel":
        """Normalize `samples` and wrap them."""
        return cls(id=id, samples=normalize_waveform(samples, fs), fs=int(fs), label=label)

    @property
    def support_len(self) -> int:
        return int(self.samples.size)

    @property
    def support_seconds(self) -> float:
        return self.support_len / self.fs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "fs": self.fs,
            "support_len": self.support_len,
            "label": self.label,
        }


def compute_bank_hash(kernels: Sequence[Kernel], fs: int) -> int:
    """64-bit content digest over fs and every kernel's samples."""
    h = hashlib.blake2b(digest_size=8)
    h.update(np.uint32(fs).astype("<u4").tobytes())
    h.update(np.uint64(len(kernels)).astype("<u8").tobytes())
    for kernel in kernels:
        h.update(np.uint64(kernel.support_len).astype("<u8").tobytes())
        h.update(kernel.samples.astype("<f8").tobytes())
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True, eq=False)
class KernelBank:
    """The kernel ensemble with stable ids 0..m-1."""
    kernels: Tuple[Kernel, ...]
    fs: int
    bank_hash: int = field(init=False)

    def __post_init__(self):
        kernels = tuple(self.kernels)
        object.__setattr__(self, "kernels", kernels)
        if not kernels:
            raise ConfigError("kernel bank is empty")
        if len(kernels) > 65535:
            raise ConfigError(f"kernel bank too large: {len(kernels)} > 65535")
        for idx, kernel in enumerate(kernels):
            if kernel.id != idx:
                raise ConfigError(f"kernel ids must be 0..m-1 in order, got {kernel.id} at position {idx}")
            if kernel.fs != self.fs:
                raise ConfigError(f"kernel {idx} has fs={kernel.fs}, bank fs={self.fs}")
        object.__setattr__(self, "bank_hash", compute_bank_hash(kernels, self.fs))

    @property
    def m(self) -> int:
        return len(self.kernels)

    @property
    def max_support(self) -> int:
        return max(k.support_len for k in self.kernels)

    @property
    def supports(self) -> np.ndarray:
        return np.array([k.support_len for k in self.kernels], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.kernels)

    def __getitem__(self, j: int) -> Kernel:
        return self.kernels[j]

    def scatter(self, out: np.ndarray, kernel_ids, times, coeffs) -> np.ndarray:
        """
        Add coeff * K_j[t - u] into out[u] for every spike, in place.

        Samples falling outside [0, len(out)) are dropped.
        """
        n = out.size
        for j, t, c in zip(np.asarray(kernel_ids), np.asarray(times), np.asarray(coeffs, dtype=np.float64)):
            if c == 0.0:
                continue
            rev = self.kernels[int(j)].samples[::-1]
            start = int(t) - rev.size + 1
            lo = max(start, 0)
            hi = min(int(t) + 1, n)
            if lo < hi:
                out[lo:hi] += c * rev[lo - start:hi - start]
        return out

    def waveform(self, j: int, t: int, length: int) -> np.ndarray:
        """The spike waveform of kernel j at time t on [0, length)."""
        return self.scatter(np.zeros(length), [j], [t], [1.0])

    def hash_hex(self) -> str:
        return f"{self.bank_hash:016x}"

    def check_hash(self, bank_hash: int, context: str = "spike train") -> None:
        if int(bank_hash) != self.bank_hash:
            raise CompatibilityError(
                f"{context} was encoded with bank {int(bank_hash):016x}, "
                f"current bank is {self.hash_hex()}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "fs": self.fs,
            "max_support": self.max_support,
            "bank_hash": self.hash_hex(),
        }


class CorrTable:
    """
    Pairwise kernel cross-correlations rho_jk(lag) = (1/fs) sum_u K_j[u] K_k[u + lag].

    Only pairs j <= k are stored; rho_kj(lag) is read as rho_jk(-lag), so the
    symmetry holds exactly. Lags outside [-(L_j - 1), L_k - 1] are zero.
    """

    def __init__(self, bank_hash: int, supports: np.ndarray, values: np.ndarray,
                 offsets: np.ndarray, fs: int):
        self.bank_hash = int(bank_hash)
        self.fs = int(fs)
        self.supports = np.asarray(supports, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.values.setflags(write=False)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.m = int(self.supports.size)

    @property
    def nbytes(self) -> int:
        return int(self.values.nbytes + self.offsets.nbytes)

    def lag_range(self, j: int, k: int) -> Tuple[int, int]:
        return -(int(self.supports[j]) - 1), int(self.supports[k]) - 1

    def lookup(self, j, k, lag) -> np.ndarray:
        """Vectorized rho_{j,k}(lag) over broadcast arrays."""
        j = np.asarray(j, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        lag = np.asarray(lag, dtype=np.int64)
        j, k, lag = np.broadcast_arrays(j, k, lag)

        swap = j > k
        a = np.where(swap, k, j)
        b = np.where(swap, j, k)
        ell = np.where(swap, -lag, lag)

        lo = -(self.supports[a] - 1)
        hi = self.supports[b] - 1
        valid = (ell >= lo) & (ell <= hi)
        idx = self.offsets[a, b] + np.where(valid, ell - lo, 0)
        return np.where(valid, self.values[idx], 0.0)

    def value(self, j: int, k: int, lag: int) -> float:
        return float(self.lookup(j, k, lag))

    def check_bank(self, bank_hash: int) -> None:
        if int(bank_hash) != self.bank_hash:
            raise CompatibilityError(
                f"correlation table belongs to bank {self.bank_hash:016x}, got {int(bank_hash):016x}"
            )
