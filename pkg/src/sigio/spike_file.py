"""
Spike-train container (.spk), little-endian throughout.

    header   44 bytes  magic "SPKC", version u8, flags u8, reserved u16,
                       fs u32, signal_len u64, bank_hash u64, spike_count u64, gain f64
    ahp      24 bytes  C f64, M f64, delta f64 (seconds)
    records  per spike kernel_id u16, sample_index u64 [, threshold f64 if flags bit0]

flags bit0: thresholds stored; bit1: stored thresholds are measured C^j[t].
With bit0 clear the reader replays the threshold model from the ahp block.
"""

import logging
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from src.encoding.encoder import replay_thresholds
from src.encoding.models import SpikeTrain, ThresholdParams
from src.kernels.models import KernelBank
from src.utils.validation import ConfigError, FormatError, InputError

logger = logging.getLogger("SPIKECODEC.IO")

MAGIC = b"SPKC"
VERSION = 1
FLAG_THRESHOLDS = 0x01
FLAG_MEASURED = 0x02

HEADER = struct.Struct("<4sBBHIQQQd")
AHP = struct.Struct("<3d")
RECORD = np.dtype([("kernel_id", "<u2"), ("sample_index", "<u8")])
RECORD_T = np.dtype([("kernel_id", "<u2"), ("sample_index", "<u8"), ("threshold", "<f8")])

PREAMBLE_SIZE = HEADER.size + AHP.size


def expected_size(spike_count: int, store_thresholds: bool) -> int:
    return PREAMBLE_SIZE + spike_count * (RECORD_T if store_thresholds else RECORD).itemsize


def write_spikes(path: str, spikes: SpikeTrain, params: Optional[ThresholdParams] = None,
                 store_thresholds: Optional[bool] = None) -> int:
    """
    Write a train; returns the byte count.

    Thresholds are stored when requested or when the train carries measured
    thresholds, which cannot be replayed.
    """
    params = params or spikes.params
    if store_thresholds is None:
        store_thresholds = spikes.measured
    if spikes.measured:
        store_thresholds = True
    if params is None and not store_thresholds:
        raise ConfigError("threshold parameters are required when thresholds are not stored")
    if len(spikes) and int(spikes.kernel_ids.max()) > 0xFFFF:
        raise ConfigError("kernel ids must fit in 16 bits")

    flags = (FLAG_THRESHOLDS if store_thresholds else 0) | (FLAG_MEASURED if spikes.measured else 0)
    header = HEADER.pack(
        MAGIC, VERSION, flags, 0,
        int(spikes.fs), int(spikes.signal_len), int(spikes.bank_hash) & 0xFFFFFFFFFFFFFFFF,
        len(spikes), float(spikes.gain),
    )
    ahp = AHP.pack(*(
        (params.C, params.M, params.delta) if params else (0.0, 0.0, 0.0)
    ))

    records = np.zeros(len(spikes), dtype=RECORD_T if store_thresholds else RECORD)
    records["kernel_id"] = spikes.kernel_ids
    records["sample_index"] = spikes.times
    if store_thresholds:
        records["threshold"] = spikes.thresholds

    payload = header + ahp + records.tobytes()
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(payload)
    logger.info(f"Wrote {len(spikes)} spikes to {p} ({len(payload)} bytes, thresholds {'stored' if store_thresholds else 'inferred'})")
    return len(payload)


def read_spikes(path: str, bank: Optional[KernelBank] = None) -> SpikeTrain:
    """
    Read a train, replaying thresholds when they were not stored.

    Raises:
        FormatError: missing file, bad magic/version or truncated payload
        CompatibilityError: `bank` given and its hash differs from the file's
    """
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"spike file not found: {p}")
    data = p.read_bytes()
    if len(data) < PREAMBLE_SIZE:
        raise FormatError(f"{p}: truncated header ({len(data)} bytes)")

    magic, version, flags, _reserved, fs, signal_len, bank_hash, count, gain = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{p}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{p}: unsupported version {version}")
    C, M, delta = AHP.unpack_from(data, HEADER.size)

    stored = bool(flags & FLAG_THRESHOLDS)
    if len(data) != expected_size(count, stored):
        raise FormatError(f"{p}: size {len(data)} does not match {count} records")
    records = np.frombuffer(data, dtype=RECORD_T if stored else RECORD, count=count, offset=PREAMBLE_SIZE)

    params = ThresholdParams(C, M, delta) if C > 0 and M > 0 and delta > 0 else None
    kernel_ids = records["kernel_id"].astype(np.int64)
    times = records["sample_index"].astype(np.int64)
    if stored:
        thresholds = records["threshold"].astype(np.float64)
    else:
        if params is None:
            raise FormatError(f"{p}: thresholds not stored and ahp block is empty")
        thresholds = replay_thresholds(kernel_ids, times, params, fs)

    if bank is not None:
        bank.check_hash(bank_hash, context=str(p))

    try:
        train = SpikeTrain(
            kernel_ids, times, thresholds,
            fs=int(fs), signal_len=int(signal_len), bank_hash=int(bank_hash),
            params=params, gain=float(gain), measured=bool(flags & FLAG_MEASURED),
        )
    except InputError as e:
        raise FormatError(f"{p}: invalid spike records: {e}") from e
    logger.info(f"Read {count} spikes from {p}")
    return train
