"""
Shared fixtures: a small 8 kHz gammatone bank and its correlation table.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.encoding.models import ThresholdParams
from src.kernels.bank import cross_corr_table, default_bank
from src.sigio.synth import synth_in_span, synth_random_spec

FS = 8000


@pytest.fixture(scope="session")
def small_bank():
    return default_bank({"count": 6, "low_hz": 100.0}, fs=FS)


@pytest.fixture(scope="session")
def small_table(small_bank):
    return cross_corr_table(small_bank)


@pytest.fixture(scope="session")
def stable_params(small_bank):
    """M comfortably above 2 * sqrt(tau_max) for peak-1 input."""
    tau_max = small_bank.max_support / small_bank.fs
    return ThresholdParams(C=0.02, M=2.5 * math.sqrt(tau_max), delta=0.01)


@pytest.fixture(scope="session")
def dense_params(small_bank):
    tau_max = small_bank.max_support / small_bank.fs
    return ThresholdParams(C=0.01, M=2.5 * math.sqrt(tau_max), delta=0.005)


@pytest.fixture(scope="session")
def in_span_case(small_bank):
    """(spec, samples, forced thresholds) of a 20-component in-span signal."""
    spec = synth_random_spec(small_bank, 3000, 20, seed=3)
    samples, forced = synth_in_span(spec, small_bank)
    return spec, samples, forced


@pytest.fixture
def rng():
    return np.random.default_rng(7)
