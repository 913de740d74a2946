"""
PCM16 mono WAV read/write.
"""

import logging
from pathlib import Path
from typing import Tuple

import numpy as np
from scipy.io import wavfile

from src.utils.validation import FormatError, InputError

logger = logging.getLogger("SPIKECODEC.IO")

PCM_SCALE = 32768.0


def read_wav(path: str) -> Tuple[np.ndarray, int]:
    """Samples scaled to [-1, 1) and the sample rate. Only 16-bit mono PCM is accepted."""
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"WAV file not found: {p}")
    try:
        fs, data = wavfile.read(str(p))
    except (ValueError, EOFError) as e:
        raise FormatError(f"unreadable WAV file {p}: {e}") from e

    if data.dtype != np.int16:
        raise FormatError(f"{p}: unsupported sample format {data.dtype}, expected 16-bit PCM")
    if data.ndim != 1:
        raise FormatError(f"{p}: {data.shape[1]} channels, only mono is supported")

    samples = data.astype(np.float64) / PCM_SCALE
    logger.debug(f"Read {p}: {samples.size} samples at {fs} Hz")
    return samples, int(fs)


def write_wav(path: str, samples: np.ndarray, fs: int) -> None:
    """Quantize to 16-bit PCM with saturating rounding and write a mono file."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise InputError("write_wav expects a mono 1-D signal")
    if samples.size and not np.all(np.isfinite(samples)):
        raise InputError("cannot write non-finite samples to WAV")
    data = np.clip(np.round(samples * PCM_SCALE), -32768, 32767).astype(np.int16)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(str(p), int(fs), data)
    logger.debug(f"Wrote {p}: {data.size} samples at {fs} Hz")
