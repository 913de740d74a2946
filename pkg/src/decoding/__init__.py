from src.decoding.batch import Reconstruction, BatchDecoder, solve_coefficients, reconstruct, decode
from src.decoding.window import (
    OrthoResult,
    WindowState,
    ortho_complement,
    check_window,
    stream_decode,
)

__all__ = [
    "Reconstruction",
    "BatchDecoder",
    "solve_coefficients",
    "reconstruct",
    "decode",
    "OrthoResult",
    "WindowState",
    "ortho_complement",
    "check_window",
    "stream_decode",
]
