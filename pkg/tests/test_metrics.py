"""
Tests for SNR, rate metrics, bounds and the overlap partition.
"""

import pytest
import sys
import os
import math

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.encoding import SpikeTrain, ThresholdParams, encode
from src.gram import sine_chain
from src.metrics import (
    approx_error_bound,
    complement_errors,
    evaluate,
    group_size_bound,
    max_spike_count,
    overlap_similarity,
    partition_overlap,
    per_kernel_min_isi,
    snr,
)
from src.utils.validation import DomainError, InputError, UndefinedSNRError


class TestSNR:
    """10 log10 energy ratio."""

    def test_known_value(self):
        """Test SNR of a known error."""
        x = np.array([1.0, -1.0, 1.0, -1.0])
        assert snr(x, 0.9 * x) == pytest.approx(20.0)

    def test_exact_match_is_infinite(self):
        """Exact match is inf dB."""
        x = np.linspace(-1, 1, 50)
        assert snr(x, x.copy()) == math.inf

    def test_zero_reference(self):
        """Test zero reference has undefined SNR."""
        with pytest.raises(UndefinedSNRError):
            snr(np.zeros(10), np.ones(10))

    def test_length_mismatch(self):
        """Test mismatched lengths raise."""
        with pytest.raises(InputError):
            snr(np.ones(10), np.ones(9))


class TestBounds:
    """Closed-form diagnostics."""

    def test_approx_error_bound(self):
        """Test error bound against its closed form."""
        assert approx_error_bound(0.1, 0.0, 1.0, 1.0, 0.5) == pytest.approx(0.04)
        assert approx_error_bound(0.0, 0.01, 2.0, 3.0, 0.0) == pytest.approx(0.0016)

    @pytest.mark.parametrize("args", [
        (0.1, 0.0, 1.0, 1.0, 1.0),
        (-0.1, 0.0, 1.0, 1.0, 0.5),
        (0.1, float("nan"), 1.0, 1.0, 0.5),
    ])
    def test_approx_error_bound_domain(self, args):
        """Test error bound domain checks."""
        with pytest.raises(DomainError):
            approx_error_bound(*args)

    def test_max_spike_count(self):
        """Test spike-count bound m (2S/delta + 1)."""
        params = ThresholdParams(C=0.1, M=1.0, delta=0.01)
        assert max_spike_count(6, params, 8000, 1000) == pytest.approx(156.0)

    def test_rate_bound_holds(self, small_bank, stable_params, rng):
        """Test encoded trains stay under the count bound."""
        x = rng.uniform(-1, 1, 3000)
        train = encode(x, small_bank, stable_params)
        span = x.size + small_bank.max_support - 1
        assert len(train) <= max_spike_count(small_bank.m, stable_params, small_bank.fs, span)

    def test_group_size_bound(self):
        """Test group size bound for a partition."""
        params = ThresholdParams(C=0.1, M=1.0, delta=0.01)
        assert group_size_bound(6, 616, params, 8000) == 96


class TestSpikeStatistics:
    """ISI and overlap measures."""

    def test_min_isi(self):
        """Test smallest same-kernel interval."""
        train = SpikeTrain([0, 1, 0, 1], [10, 12, 30, 60], [1.0] * 4, fs=8000, signal_len=100, bank_hash=1)
        assert per_kernel_min_isi(train) == 20

    def test_min_isi_single_spikes(self):
        """One spike per kernel has no interval."""
        train = SpikeTrain([0, 1], [10, 12], [1.0, 1.0], fs=8000, signal_len=100, bank_hash=1)
        assert per_kernel_min_isi(train) is None

    def test_overlap_similarity_identical(self, small_bank):
        """Test a spike overlaps itself with similarity 1."""
        assert overlap_similarity(small_bank, 2, 2, 0) == pytest.approx(1.0)

    def test_overlap_similarity_disjoint(self, small_bank):
        """Test spikes beyond the support do not overlap."""
        L = small_bank[1].support_len
        assert overlap_similarity(small_bank, 0, 1, L) == 0.0

    def test_overlap_similarity_range(self, small_bank):
        """Test similarity stays within [0, 1]."""
        for lag in (1, 5, 20, 100):
            assert 0.0 <= overlap_similarity(small_bank, 0, 3, lag) <= 1.0 + 1e-12


class TestEvaluate:
    """EvalReport assembly."""

    def _train(self, count, length=8000):
        if count == 0:
            return SpikeTrain.empty(fs=8000, signal_len=length, bank_hash=1)
        times = np.arange(count) * (length // count)
        return SpikeTrain(np.zeros(count, dtype=np.int64), times, np.ones(count),
                          fs=8000, signal_len=length, bank_hash=1)

    def test_rates(self):
        """Test spike rate, nyquist fraction and smallest interval."""
        x = np.sin(np.arange(8000) / 10.0)
        report = evaluate(x, self._train(400), 0.5 * x)
        assert report.spike_count == 400
        assert report.spikes_per_second == pytest.approx(400.0)
        assert report.nyquist_fraction == pytest.approx(0.05)
        assert report.snr_db == pytest.approx(20 * math.log10(2.0))
        assert not report.perfect
        assert report.min_isi_samples == 20
        assert report.to_dict()["min_isi_samples"] == 20

    def test_perfect_serialized_as_inf(self):
        """Test perfect reconstruction serializes as "inf"."""
        x = np.sin(np.arange(800) / 10.0)
        report = evaluate(x, self._train(10, 800), x.copy())
        assert report.perfect
        assert report.to_dict()["snr_db"] == "inf"

    def test_silent_signal(self):
        """Silent reference: SNR undefined, no intervals."""
        report = evaluate(np.zeros(800), self._train(0, 800), np.zeros(800))
        assert not report.snr_defined
        assert report.to_dict()["snr_db"] is None
        assert report.spike_count == 0
        assert report.min_isi_samples is None

    def test_length_mismatch(self):
        """Test evaluate names itself in the length error."""
        with pytest.raises(InputError, match="in evaluate"):
            evaluate(np.ones(10), self._train(0, 10), np.ones(11))

    def test_params_echoed(self, small_bank, stable_params, rng):
        """Test threshold parameters appear in the report."""
        x = rng.uniform(-1, 1, 500)
        train = encode(x, small_bank, stable_params)
        report = evaluate(x, train, np.zeros(500), runtime_ms={"encode": 1.5})
        assert report.params == stable_params.to_dict()
        assert report.to_dict()["runtime_ms"] == {"encode": 1.5}


class TestPartition:
    """Backward overlap partition."""

    def test_encoded_train_partition_is_valid(self, small_bank, dense_params, rng):
        """Test partition of an encoded train is valid and within its bound."""
        train = encode(rng.uniform(-1, 1, 2500), small_bank, dense_params)
        partition = partition_overlap(train, small_bank)
        assert partition.valid
        assert sum(partition.sizes()) == len(train)
        assert partition.groups[0] == (len(train) - 1, len(train))
        assert partition.d_max <= group_size_bound(small_bank.m, small_bank.max_support,
                                                   dense_params, small_bank.fs)

    def test_sine_chain_groups_are_singletons(self):
        """Sine-chain spikes never share a group."""
        chain = sine_chain(12)
        partition = partition_overlap(chain.spikes, chain.bank)
        assert partition.sizes() == [1] * 12
        assert partition.d_max == 1
        assert partition.bound is None
        assert partition.valid

    def test_empty_train(self, small_bank, stable_params):
        """Test empty train partitions to nothing."""
        train = SpikeTrain.empty(fs=small_bank.fs, signal_len=10, bank_hash=small_bank.bank_hash)
        partition = partition_overlap(train, small_bank, stable_params)
        assert partition.groups == []
        assert partition.valid

    def test_gap_restarts_chain(self, small_bank):
        """Test a gap longer than the supports starts a new chain."""
        L = small_bank.max_support
        train = SpikeTrain([0, 0], [L, 4 * L], [1.0, 1.0], fs=small_bank.fs,
                           signal_len=4 * L + 1, bank_hash=small_bank.bank_hash)
        partition = partition_overlap(train, small_bank)
        assert partition.restarts == 1
        assert partition.groups == [(1, 2), (0, 1)]

    def test_complement_errors_decrease_to_zero(self, small_bank, small_table, dense_params, rng):
        """Test complement errors shrink to zero."""
        train = encode(rng.uniform(-1, 1, 1500), small_bank, dense_params)
        partition = partition_overlap(train, small_bank)
        errors = complement_errors(train, small_table, partition)
        assert errors.size == len(partition.groups) - 1
        assert np.all(np.diff(errors) <= 1e-6)
        assert errors[-1] == 0.0

    def test_complement_errors_sine_chain(self):
        """Test complement errors on the sine chain."""
        chain = sine_chain(10)
        partition = partition_overlap(chain.spikes, chain.bank)
        errors = complement_errors(chain.spikes, chain.table, partition)
        assert errors[0] > 0
        assert np.all(np.diff(errors) <= 1e-10)
        assert errors[-1] == pytest.approx(0.0, abs=1e-10)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
