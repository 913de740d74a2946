"""
Error hierarchy and input validation for SPIKECODEC.

Every failure raised by the library derives from SpikeCodecError and carries
the process exit code the CLI maps it to (1 usage/config, 2 format, 3 numeric).
"""

import logging
from typing import Optional, Tuple

import numpy as np


class SpikeCodecError(Exception):
    """Base class for all library errors."""
    exit_code = 1


class ConfigError(SpikeCodecError):
    """Invalid parameters, bank specs or run configuration."""
    exit_code = 1


class AliasingError(ConfigError):
    """Kernel center frequency at or above Nyquist."""
    pass


class DegenerateKernelError(ConfigError):
    """Kernel truncation left fewer than two samples."""
    pass


class InputError(SpikeCodecError):
    """Signal content the codec cannot accept (NaN, length mismatch, ...)."""
    exit_code = 1


class UndefinedSNRError(InputError):
    """SNR requested against an all-zero reference."""
    pass


class FormatError(SpikeCodecError):
    """Unreadable or unsupported file."""
    exit_code = 2


class CompatibilityError(FormatError):
    """Spike train and kernel bank do not belong together."""
    pass


class NumericError(SpikeCodecError):
    """Numerical failure or violated numerical invariant."""
    exit_code = 3


class DomainError(NumericError):
    """Argument outside the domain of a bound formula."""
    pass


class SequencingError(NumericError):
    """Spike arrived out of time order in a streaming decoder."""
    pass


class BatchSizeError(NumericError):
    """Batch decode requested for a train above the configured cap."""
    pass


class SignalValidator:
    """
    Reusable signal checks.

    In strict mode failures raise; otherwise they return (False, message) and log.
    """

    def __init__(self, peak_limit: float = 1.0, strict_mode: bool = True):
        self.peak_limit = peak_limit
        self.strict_mode = strict_mode
        self.logger = logging.getLogger("SPIKECODEC.Validator")

    def _fail(self, msg: str, error: type = InputError) -> Tuple[bool, str]:
        if self.strict_mode:
            raise error(msg)
        self.logger.warning(msg)
        return False, msg

    def validate_finite(self, signal: np.ndarray, name: str = "signal") -> Tuple[bool, str]:
        """Reject NaN/inf samples."""
        signal = np.asarray(signal)
        if signal.size and not np.all(np.isfinite(signal)):
            bad = int(np.count_nonzero(~np.isfinite(signal)))
            return self._fail(f"{name} contains {bad} non-finite samples")
        return True, ""

    def validate_peak(self, signal: np.ndarray, name: str = "signal") -> Tuple[bool, str]:
        """
        Check the peak-normalization contract.

        Never raises: an over-range input is legal but voids the ISI guarantee.
        """
        signal = np.asarray(signal)
        if signal.size == 0:
            return True, ""
        peak = float(np.max(np.abs(signal)))
        if peak > self.peak_limit:
            msg = f"{name} peak {peak:.4f} exceeds {self.peak_limit}; encoder assumes peak-normalized input"
            self.logger.warning(msg)
            return False, msg
        return True, ""

    def validate_lengths(self, a: np.ndarray, b: np.ndarray, context: str = "") -> Tuple[bool, str]:
        if len(a) != len(b):
            return self._fail(f"length mismatch{' in ' + context if context else ''}: {len(a)} vs {len(b)}")
        return True, ""


def check_finite_vector(values: np.ndarray, name: str, error: type = InputError) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise error(f"{name} contains non-finite values")
    return arr


def describe_exit(error: Optional[BaseException]) -> int:
    """Exit code for an exception, 0 for None."""
    if error is None:
        return 0
    if isinstance(error, SpikeCodecError):
        return error.exit_code
    if isinstance(error, (FileNotFoundError, IsADirectoryError, PermissionError)):
        return 2
    return 1
