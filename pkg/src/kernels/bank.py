"""
Kernel bank construction, bank spec files and the cross-correlation table.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import signal as sps

from src.kernels.gammatone import erb_space, make_gammatone
from src.kernels.models import CorrTable, Kernel, KernelBank, normalize_waveform
from src.utils.validation import ConfigError, FormatError

logger = logging.getLogger("SPIKECODEC.Kernels")

DEFAULT_HIGH_FRACTION = 0.45


@dataclass(frozen=True)
class GammatoneSpec:
    """One gammatone record; bandwidth None means the ERB rule."""
    f: float
    n: int = 4
    b: Optional[float] = None
    phase: float = 0.0

    def to_line(self) -> str:
        b = "auto" if self.b is None else f"{self.b:g}"
        return f"gammatone f={self.f:g} n={self.n} b={b} phase={self.phase:g}"


BankRecord = Union[GammatoneSpec, Kernel, np.ndarray, Sequence[float]]


def build_bank(spec: Sequence[BankRecord], fs: int, trunc_rel: float = 1e-4) -> KernelBank:
    """
    Build a normalized bank with ids in spec order.

    Records are GammatoneSpec entries or explicit waveforms (arrays or Kernels
    sharing `fs`).
    """
    if spec is None or len(spec) == 0:
        raise ConfigError("bank spec is empty")
    if len(spec) > 65535:
        raise ConfigError(f"bank spec has {len(spec)} records, limit is 65535")

    kernels: List[Kernel] = []
    seen_params = set()
    seen_waves = set()
    for idx, record in enumerate(spec):
        if isinstance(record, GammatoneSpec):
            if record in seen_params:
                raise ConfigError(f"duplicate bank record {idx}: {record.to_line()}")
            seen_params.add(record)
            kernel = make_gammatone(record.f, record.n, record.b, record.phase, fs, trunc_rel, id=idx)
        elif isinstance(record, Kernel):
            if record.fs != fs:
                raise ConfigError(f"bank record {idx} has fs={record.fs}, expected {fs}")
            kernel = Kernel(id=idx, samples=record.samples, fs=fs, label=record.label)
        else:
            kernel = Kernel(id=idx, samples=normalize_waveform(record, fs), fs=fs,
                            label=f"waveform len={len(record)}")

        key = kernel.samples.tobytes()
        if key in seen_waves:
            raise ConfigError(f"duplicate kernel waveform at bank record {idx}")
        seen_waves.add(key)
        kernels.append(kernel)

    bank = KernelBank(kernels=tuple(kernels), fs=int(fs))
    logger.info(f"Kernel bank built: m={bank.m}, fs={fs}, max_support={bank.max_support}, hash={bank.hash_hex()}")
    return bank


def _parse_fields(tokens: List[str], lineno: int) -> Dict[str, str]:
    fields = {}
    for token in tokens:
        if "=" not in token:
            raise ConfigError(f"bank spec line {lineno}: expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        fields[key.strip().lower()] = value.strip()
    return fields


def _number(fields: Dict[str, str], key: str, lineno: int, default: Any = None, cast=float):
    raw = fields.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"bank spec line {lineno}: missing {key}=")
        return default
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigError(f"bank spec line {lineno}: bad {key}={raw!r}") from e


def parse_bank_spec(text: str, fs: int) -> List[GammatoneSpec]:
    """
    Parse bank spec text.

    Records:
        gammatone f=<Hz> n=<int> b=<Hz|auto> phase=<rad>
        erb count=<m> low=<Hz> high=<Hz|auto> n=<int> phase=<rad>
    Blank lines and `#` comments are ignored.
    """
    records: List[GammatoneSpec] = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *tokens = line.split()
        fields = _parse_fields(tokens, lineno)
        kind = kind.lower()

        if kind == "gammatone":
            unknown = set(fields) - {"f", "n", "b", "phase"}
            if unknown:
                raise ConfigError(f"bank spec line {lineno}: unknown keys {sorted(unknown)}")
            b_raw = fields.get("b", "auto")
            b = None if b_raw.lower() == "auto" else _number(fields, "b", lineno)
            records.append(GammatoneSpec(
                f=_number(fields, "f", lineno),
                n=_number(fields, "n", lineno, default=4, cast=int),
                b=b,
                phase=_number(fields, "phase", lineno, default=0.0),
            ))
        elif kind == "erb":
            unknown = set(fields) - {"count", "low", "high", "n", "phase"}
            if unknown:
                raise ConfigError(f"bank spec line {lineno}: unknown keys {sorted(unknown)}")
            count = _number(fields, "count", lineno, cast=int)
            low = _number(fields, "low", lineno, default=50.0)
            high_raw = fields.get("high", "auto")
            high = DEFAULT_HIGH_FRACTION * fs if high_raw.lower() == "auto" else _number(fields, "high", lineno)
            order = _number(fields, "n", lineno, default=4, cast=int)
            phase = _number(fields, "phase", lineno, default=0.0)
            for f in erb_space(low, high, count):
                records.append(GammatoneSpec(f=float(f), n=order, b=None, phase=phase))
        else:
            raise ConfigError(f"bank spec line {lineno}: unknown record type {kind!r}")

    if not records:
        raise ConfigError("bank spec has no records")
    return records


def load_bank_spec(path: str, fs: int, trunc_rel: float = 1e-4) -> KernelBank:
    """Read a bank spec file and build the bank."""
    p = Path(path)
    if not p.exists():
        raise FormatError(f"bank spec not found: {p}")
    records = parse_bank_spec(p.read_text(encoding="utf-8"), fs)
    return build_bank(records, fs, trunc_rel=trunc_rel)


def default_bank(config: Dict[str, Any] = None, fs: Optional[int] = None) -> KernelBank:
    """ERB-spaced gammatone bank from the `kernels` config section."""
    config = config or {}
    fs = int(fs or config.get("fs", 44100))
    count = int(config.get("count", 50))
    low = float(config.get("low_hz", 50.0))
    high = float(config.get("high_fraction", DEFAULT_HIGH_FRACTION)) * fs
    order = int(config.get("order", 4))
    records = [GammatoneSpec(f=float(f), n=order) for f in erb_space(low, high, count)]
    return build_bank(records, fs, trunc_rel=float(config.get("trunc_rel", 1e-4)))


def _row_correlations(bank: KernelBank, j: int, method: str) -> List[np.ndarray]:
    reversed_j = bank[j].samples[::-1]
    row = [
        sps.convolve(bank[k].samples, reversed_j, mode="full", method=method) / bank.fs
        for k in range(j, bank.m)
    ]
    # autocorrelations are even in the lag
    row[0] = 0.5 * (row[0] + row[0][::-1])
    return row


def cross_corr_table(bank: KernelBank, threads: int = 1, method: str = "auto") -> CorrTable:
    """
    Precompute rho_jk over every lag for j <= k.

    Rows run in parallel; each pair is computed by one call, so results do not
    depend on the thread count.
    """
    m = bank.m
    supports = bank.supports
    if threads > 1 and m > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda j: _row_correlations(bank, j, method), range(m)))
    else:
        rows = [_row_correlations(bank, j, method) for j in range(m)]

    offsets = np.zeros((m, m), dtype=np.int64)
    chunks = []
    cursor = 0
    for j, row in enumerate(rows):
        for k, seq in zip(range(j, m), row):
            offsets[j, k] = cursor
            chunks.append(seq)
            cursor += seq.size

    values = np.concatenate(chunks)
    # unit diagonal exactly at lag 0
    for j in range(m):
        values[offsets[j, j] + supports[j] - 1] = 1.0

    table = CorrTable(bank.bank_hash, supports, values, offsets, bank.fs)
    logger.info(f"Correlation table built: {m * (m + 1) // 2} pairs, {table.nbytes / 1e6:.1f} MB")
    return table
