"""
Tests for the convolve-and-threshold encoder.

Covers the threshold model, the first-crossing spiking rule, interspike
interval guarantees and deterministic output.
"""

import pytest
import sys
import os
import logging

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.encoding import (
    Spike,
    SpikeEncoder,
    SpikeTrain,
    ThresholdParams,
    convolve,
    encode,
    replay_thresholds,
    threshold_at,
)
from src.utils.validation import ConfigError, InputError


class TestThresholdParams:
    """ahp parameter validation."""

    @pytest.mark.parametrize("C,M,delta", [(0.0, 1.0, 0.01), (0.1, -1.0, 0.01), (0.1, 1.0, 0.0),
                                           (float("nan"), 1.0, 0.01)])
    def test_rejects_non_positive(self, C, M, delta):
        """Test C, M and delta must be positive."""
        with pytest.raises(ConfigError):
            ThresholdParams(C, M, delta)

    def test_stability_condition(self):
        """Test stability flag against 2 b sqrt(tau)."""
        params = ThresholdParams(C=0.1, M=1.0, delta=0.01)
        assert params.is_stable(1.0, 0.2)        # 2 * sqrt(0.2) = 0.894
        assert not params.is_stable(1.0, 0.3)    # 2 * sqrt(0.3) = 1.095

    def test_dict_roundtrip(self):
        """Parameters survive to_dict and back."""
        params = ThresholdParams(C=0.1, M=1.5, delta=0.02)
        assert ThresholdParams.from_dict(params.to_dict()) == params


class TestThresholdModel:
    """C + sum M (1 - age / delta) over recent same-kernel spikes."""

    params = ThresholdParams(C=0.5, M=2.0, delta=0.01)   # 80 samples at 8 kHz

    def test_baseline_without_history(self):
        """Test threshold equals C before any spike."""
        assert threshold_at([], 100, self.params, 8000) == 0.5

    def test_jump_at_spike(self):
        """Test threshold jumps by M at the spike sample."""
        assert threshold_at([100], 100, self.params, 8000) == pytest.approx(2.5)

    def test_linear_decay(self):
        """Test the ahp term decays linearly over delta."""
        assert threshold_at([100], 140, self.params, 8000) == pytest.approx(0.5 + 2.0 * 0.5)

    def test_back_to_baseline_after_refractory(self):
        """Threshold is back at C once delta has elapsed."""
        assert threshold_at([100], 180, self.params, 8000) == pytest.approx(0.5)
        assert threshold_at([100], 181, self.params, 8000) == 0.5

    def test_future_spikes_ignored(self):
        """Test spikes after t do not affect the threshold at t."""
        assert threshold_at([200], 100, self.params, 8000) == 0.5

    def test_terms_accumulate(self):
        """Test overlapping ahp terms add."""
        value = threshold_at([100, 120], 140, self.params, 8000)
        assert value == pytest.approx(0.5 + 2.0 * (1 - 40 / 80) + 2.0 * (1 - 20 / 80))

    def test_vector_matches_scalar_bitwise(self):
        """Test vectorized thresholds equal the scalar path bit for bit."""
        history = [10, 50, 95]
        t = np.arange(90, 200)
        vec = threshold_at(history, t, self.params, 8000)
        for ti, v in zip(t, vec):
            assert threshold_at(history, int(ti), self.params, 8000) == v


class TestConvolution:
    """C^j[t] = <X, phi_t>."""

    def test_length_and_trailing_zero(self, small_bank, rng):
        """Test full-length convolution ends in zero."""
        x = rng.uniform(-1, 1, 500)
        conv = convolve(x, small_bank[0])
        assert conv.size == 500 + small_bank[0].support_len
        assert conv[-1] == 0.0

    def test_empty_signal(self, small_bank):
        """Empty signal convolves to nothing."""
        assert convolve(np.zeros(0), small_bank[0]).size == 0

    def test_equals_inner_product_with_spike_waveform(self, small_bank, rng):
        """Test each convolution sample is the inner product with the spike waveform."""
        x = rng.uniform(-1, 1, 800)
        j = 3
        conv = convolve(x, small_bank[j])
        for t in (0, 57, 400, 799, 900):
            direct = float(x @ small_bank.waveform(j, t, x.size)) / small_bank.fs
            assert conv[t] == pytest.approx(direct, abs=1e-12)


class TestSpikingRule:
    """Spikes fire at the first sample where C^j meets the threshold."""

    def test_first_crossing(self, small_bank, stable_params, rng):
        """Test first spike lands on the first sample at or above C."""
        x = rng.uniform(-1, 1, 1500)
        train = encode(x, small_bank, stable_params)
        for j in (0, small_bank.m - 1):
            conv = convolve(x, small_bank[j])
            times = train.kernel_times(j)
            fired = set(times.tolist())
            for t in range(conv.size):
                thr = threshold_at(times[times < t], t, stable_params, small_bank.fs)
                if t in fired:
                    assert conv[t] >= thr
                else:
                    assert conv[t] < thr

    def test_silent_input_has_no_spikes(self, small_bank, stable_params):
        """Silence never crosses the baseline."""
        train = encode(np.zeros(1000), small_bank, stable_params)
        assert len(train) == 0
        assert train.signal_len == 1000

    def test_empty_input(self, small_bank, stable_params):
        """Test zero-length input gives an empty train."""
        assert len(encode(np.zeros(0), small_bank, stable_params)) == 0

    def test_nan_rejected(self, small_bank, stable_params):
        """Test NaN input is an input error."""
        x = np.zeros(100)
        x[5] = np.nan
        with pytest.raises(InputError):
            encode(x, small_bank, stable_params)

    def test_multichannel_rejected(self, small_bank, stable_params):
        """Test 2-D input is refused."""
        with pytest.raises(InputError):
            encode(np.zeros((100, 2)), small_bank, stable_params)

    def test_over_range_warns(self, small_bank, stable_params, rng, caplog):
        """Test peak above 1 is logged, not raised."""
        with caplog.at_level(logging.WARNING):
            encode(2.0 * rng.uniform(-1, 1, 400), small_bank, stable_params)
        assert any("peak" in r.getMessage() for r in caplog.records)

    def test_unstable_params_warn(self, small_bank, rng, caplog):
        """Test a small M logs the stability warning."""
        params = ThresholdParams(C=0.02, M=1e-3, delta=0.01)
        with caplog.at_level(logging.WARNING):
            encode(rng.uniform(-1, 1, 400), small_bank, params)
        assert any("Stability" in r.getMessage() for r in caplog.records)


class TestSpikeTrainProperties:
    """ISI, replay and determinism of encoder output."""

    def test_isi_exceeds_half_delta(self, small_bank, stable_params, rng):
        """Test same-kernel intervals stay above delta/2 with stable parameters."""
        half = stable_params.delta_samples(small_bank.fs) / 2
        for _ in range(5):
            train = encode(rng.uniform(-1, 1, 2000), small_bank, stable_params)
            for j in range(small_bank.m):
                gaps = np.diff(train.kernel_times(j))
                assert np.all(gaps > half)

    def test_sorted_by_time_then_kernel(self, small_bank, dense_params, rng):
        """Spikes come out ordered by time, then kernel."""
        train = encode(rng.uniform(-1, 1, 2000), small_bank, dense_params)
        keys = list(zip(train.times.tolist(), train.kernel_ids.tolist()))
        assert keys == sorted(keys)

    def test_replay_is_bit_identical(self, small_bank, dense_params, rng):
        """Test replayed thresholds equal the encoder's bit for bit."""
        train = encode(rng.uniform(-1, 1, 2000), small_bank, dense_params)
        replayed = replay_thresholds(train.kernel_ids, train.times, dense_params, small_bank.fs)
        assert replayed.tobytes() == train.thresholds.tobytes()

    def test_thread_count_does_not_change_output(self, small_bank, dense_params, rng):
        """Test threaded encode equals single-threaded encode."""
        x = rng.uniform(-1, 1, 1500)
        a = encode(x, small_bank, dense_params, threads=1)
        b = encode(x, small_bank, dense_params, threads=4)
        assert a.same_as(b)

    def test_store_measured(self, small_bank, dense_params, rng):
        """Test measured thresholds are the convolution values at the spikes."""
        x = rng.uniform(-1, 1, 1500)
        train = encode(x, small_bank, dense_params, store_measured=True)
        assert train.measured
        for j in range(small_bank.m):
            conv = convolve(x, small_bank[j])
            mask = train.kernel_ids == j
            assert np.array_equal(train.thresholds[mask], conv[train.times[mask]])

    def test_encoder_carries_bank_and_params(self, small_bank, stable_params):
        """Test the train records bank hash and parameters."""
        train = SpikeEncoder(small_bank, stable_params).encode(np.zeros(10))
        assert train.bank_hash == small_bank.bank_hash
        assert train.params == stable_params


class TestSpikeTrain:
    """SpikeTrain ordering contract."""

    def test_rejects_unsorted(self):
        """Test out-of-order spikes are refused."""
        with pytest.raises(InputError):
            SpikeTrain([0, 0], [5, 3], [1.0, 1.0], fs=8000, signal_len=10, bank_hash=1)

    def test_rejects_duplicates(self):
        """Same kernel at the same time is a duplicate."""
        with pytest.raises(InputError):
            SpikeTrain([1, 1], [3, 3], [1.0, 1.0], fs=8000, signal_len=10, bank_hash=1)

    def test_same_time_different_kernels(self):
        """Test simultaneous spikes on different kernels are allowed."""
        train = SpikeTrain([0, 2], [3, 3], [1.0, 2.0], fs=8000, signal_len=10, bank_hash=1)
        assert len(train) == 2

    def test_from_spikes_sorts(self):
        """Test from_spikes orders its input."""
        spikes = [Spike(1, 9, 0.5), Spike(0, 9, 0.25), Spike(2, 1, 1.0)]
        train = SpikeTrain.from_spikes(spikes, fs=8000, signal_len=10, bank_hash=1)
        assert train.times.tolist() == [1, 9, 9]
        assert train.kernel_ids.tolist() == [2, 0, 1]
        assert train[1] == Spike(0, 9, 0.25)

    def test_same_as_compares_threshold_bits(self):
        """Test same_as compares thresholds bitwise."""
        a = SpikeTrain([0], [3], [0.0], fs=8000, signal_len=10, bank_hash=1)
        b = a.with_thresholds(np.array([-0.0]))
        assert not a.same_as(b)
        assert a.same_as(a.subset(np.arange(1)))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
