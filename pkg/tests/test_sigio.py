"""
Tests for WAV I/O, the spike file container and synthetic signals.
"""

import pytest
import sys
import os

import numpy as np
from scipy.io import wavfile

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.encoding import SpikeTrain, encode
from src.kernels import default_bank
from src.sigio import (
    SynthSpec,
    expected_size,
    read_spikes,
    read_wav,
    synth_in_span,
    synth_random_spec,
    synth_signal,
    write_spikes,
    write_wav,
)
from src.utils.validation import CompatibilityError, ConfigError, FormatError, InputError


class TestWav:
    """16-bit mono PCM."""

    def test_roundtrip_exact_on_pcm_grid(self, tmp_path):
        """Test samples on the 16-bit grid read back exactly."""
        x = np.array([0, 1, -1, 1000, -32768, 32767]) / 32768.0
        path = tmp_path / "a.wav"
        write_wav(str(path), x, 8000)
        y, fs = read_wav(str(path))
        assert fs == 8000
        assert np.array_equal(x, y)

    def test_saturates(self, tmp_path):
        """Out-of-range samples clip to full scale."""
        path = tmp_path / "clip.wav"
        write_wav(str(path), np.array([1.0, 2.0, -3.0]), 8000)
        _, data = wavfile.read(str(path))
        assert data.tolist() == [32767, 32767, -32768]

    def test_stereo_rejected(self, tmp_path):
        """Test stereo files are refused."""
        path = tmp_path / "stereo.wav"
        wavfile.write(str(path), 8000, np.zeros((100, 2), dtype=np.int16))
        with pytest.raises(FormatError, match="mono"):
            read_wav(str(path))

    def test_float_rejected(self, tmp_path):
        """Test float WAV files are refused."""
        path = tmp_path / "float.wav"
        wavfile.write(str(path), 8000, np.zeros(100, dtype=np.float32))
        with pytest.raises(FormatError):
            read_wav(str(path))

    def test_missing_file(self, tmp_path):
        """Missing WAV raises."""
        with pytest.raises(FormatError):
            read_wav(str(tmp_path / "none.wav"))

    def test_garbage_file(self, tmp_path):
        """Test a non-WAV file is a format error."""
        path = tmp_path / "junk.wav"
        path.write_bytes(b"not a wav file at all")
        with pytest.raises(FormatError):
            read_wav(str(path))

    def test_non_finite_write(self, tmp_path):
        """Test NaN samples are not written."""
        with pytest.raises(InputError):
            write_wav(str(tmp_path / "nan.wav"), np.array([0.0, np.nan]), 8000)


class TestSpikeFile:
    """Binary spike container."""

    @pytest.fixture
    def train(self, small_bank, dense_params):
        x = np.random.default_rng(11).uniform(-1, 1, 1500)
        return encode(x, small_bank, dense_params)

    def test_sizes(self, tmp_path, train):
        """Test file size is header plus fixed-size records."""
        n = len(train)
        assert write_spikes(str(tmp_path / "a.spk"), train) == 68 + 10 * n
        assert write_spikes(str(tmp_path / "b.spk"), train, store_thresholds=True) == 68 + 18 * n
        assert os.path.getsize(tmp_path / "a.spk") == expected_size(n, False)

    def test_replayed_roundtrip_is_bit_identical(self, tmp_path, train, small_bank):
        """Test replayed thresholds read back bit for bit."""
        path = str(tmp_path / "a.spk")
        write_spikes(path, train)
        loaded = read_spikes(path, small_bank)
        assert loaded.same_as(train)
        assert loaded.params == train.params

    def test_stored_roundtrip(self, tmp_path, train):
        """Test stored thresholds read back."""
        path = str(tmp_path / "b.spk")
        write_spikes(path, train, store_thresholds=True)
        assert read_spikes(path).same_as(train)

    def test_measured_thresholds_always_stored(self, tmp_path, small_bank, dense_params):
        """Measured trains always carry their thresholds."""
        x = np.random.default_rng(12).uniform(-1, 1, 800)
        train = encode(x, small_bank, dense_params, store_measured=True)
        path = str(tmp_path / "m.spk")
        assert write_spikes(path, train, store_thresholds=False) == 68 + 18 * len(train)
        loaded = read_spikes(path)
        assert loaded.measured
        assert np.array_equal(loaded.thresholds, train.thresholds)

    def test_gain_preserved(self, tmp_path, train):
        """Test gain survives write and read."""
        train.gain = 0.25
        path = str(tmp_path / "g.spk")
        write_spikes(path, train)
        assert read_spikes(path).gain == 0.25

    def test_empty_train(self, tmp_path, small_bank, dense_params):
        """Test empty train writes a header-only file."""
        train = SpikeTrain.empty(fs=8000, signal_len=100, bank_hash=small_bank.bank_hash, params=dense_params)
        path = str(tmp_path / "e.spk")
        assert write_spikes(path, train) == 68
        assert len(read_spikes(path)) == 0

    def test_bad_magic(self, tmp_path, train):
        """Test wrong magic is a format error."""
        path = tmp_path / "bad.spk"
        write_spikes(str(path), train)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="magic"):
            read_spikes(str(path))

    def test_truncated(self, tmp_path, train):
        """Test truncated record section is detected."""
        path = tmp_path / "cut.spk"
        write_spikes(str(path), train)
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(FormatError):
            read_spikes(str(path))

    def test_short_header(self, tmp_path):
        """Test a file shorter than the header is refused."""
        path = tmp_path / "tiny.spk"
        path.write_bytes(b"SPKC")
        with pytest.raises(FormatError):
            read_spikes(str(path))

    def test_bank_mismatch(self, tmp_path, train):
        """Test reading with another bank is a compatibility error."""
        path = str(tmp_path / "a.spk")
        write_spikes(path, train)
        other = default_bank({"count": 5, "low_hz": 100.0}, fs=8000)
        with pytest.raises(CompatibilityError):
            read_spikes(path, other)

    def test_missing_params(self, tmp_path, small_bank):
        """Replay needs threshold parameters."""
        train = SpikeTrain([0], [700], [0.1], fs=8000, signal_len=800, bank_hash=small_bank.bank_hash)
        with pytest.raises(ConfigError):
            write_spikes(str(tmp_path / "p.spk"), train)

    def test_missing_file(self, tmp_path):
        """Missing spike file raises."""
        with pytest.raises(FormatError):
            read_spikes(str(tmp_path / "none.spk"))


class TestSynth:
    """In-span synthetic signals."""

    def test_component_outside_length(self):
        """Test components past the signal end are refused."""
        with pytest.raises(ConfigError):
            SynthSpec(components=[(0, 50, 1.0)], length=50)

    def test_non_finite_coefficient(self):
        """Test non-finite coefficient is refused."""
        with pytest.raises(ConfigError):
            SynthSpec(components=[(0, 10, float("inf"))], length=50)

    def test_kernel_outside_bank(self, small_bank):
        """Test kernel index beyond the bank is refused."""
        spec = SynthSpec(components=[(small_bank.m, 700, 1.0)], length=800)
        with pytest.raises(ConfigError):
            synth_in_span(spec, small_bank)

    def test_forced_thresholds_are_inner_products(self, small_bank):
        """Test forced thresholds are inner products with the synthesized signal."""
        spec = SynthSpec(components=[(1, 700, 0.5)], length=800)
        samples, forced = synth_in_span(spec, small_bank)
        assert forced[0] == pytest.approx(0.5, abs=1e-12)
        assert np.array_equal(samples, 0.5 * small_bank.waveform(1, 700, 800))

    def test_random_spec_is_seeded(self, small_bank):
        """Same seed, same spec."""
        a = synth_random_spec(small_bank, 2000, 15, seed=4)
        b = synth_random_spec(small_bank, 2000, 15, seed=4)
        assert a.components == b.components
        assert len(set((j, t) for j, t, _ in a.components)) == 15

    def test_random_spec_supports_inside(self, small_bank):
        """Test every random component lies fully inside the signal."""
        spec = synth_random_spec(small_bank, 2000, 30, seed=5)
        assert np.all(spec.times >= small_bank.supports[spec.kernel_ids] - 1)
        assert np.all(spec.times < 2000)

    def test_length_too_short(self, small_bank):
        """Test a signal shorter than the longest support is refused."""
        with pytest.raises(ConfigError):
            synth_random_spec(small_bank, 10, 2)

    def test_synth_signal_peak(self, small_bank):
        """Test synthesized signals peak at 1."""
        x = synth_signal(small_bank, 2000, 10, seed=1)
        assert np.max(np.abs(x)) == pytest.approx(1.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
