from src.kernels.models import Kernel, KernelBank, CorrTable, sampled_norm, normalize_waveform
from src.kernels.gammatone import (
    make_gammatone,
    erb,
    erb_bandwidth,
    erb_space,
    rect_kernel,
    sine_cycle_kernel,
)
from src.kernels.bank import (
    GammatoneSpec,
    build_bank,
    parse_bank_spec,
    load_bank_spec,
    default_bank,
    cross_corr_table,
)

__all__ = [
    "Kernel",
    "KernelBank",
    "CorrTable",
    "sampled_norm",
    "normalize_waveform",
    "make_gammatone",
    "erb",
    "erb_bandwidth",
    "erb_space",
    "rect_kernel",
    "sine_cycle_kernel",
    "GammatoneSpec",
    "build_bank",
    "parse_bank_spec",
    "load_bank_spec",
    "default_bank",
    "cross_corr_table",
]
