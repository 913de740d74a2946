"""
Tests for kernel synthesis, bank construction and the correlation table.
"""

import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.kernels import (
    GammatoneSpec,
    Kernel,
    build_bank,
    cross_corr_table,
    default_bank,
    erb_space,
    load_bank_spec,
    make_gammatone,
    parse_bank_spec,
    rect_kernel,
    sampled_norm,
    sine_cycle_kernel,
)
from src.utils.validation import AliasingError, CompatibilityError, ConfigError, FormatError


class TestGammatone:
    """Gammatone waveform synthesis."""

    def test_normalized(self):
        """Test kernels have unit norm under the 1/fs inner product."""
        k = make_gammatone(1000.0, fs=8000)
        assert sampled_norm(k.samples, 8000) == pytest.approx(1.0, abs=1e-12)

    def test_lower_frequency_has_longer_support(self):
        """Lower center frequency means longer support."""
        low = make_gammatone(100.0, fs=8000)
        high = make_gammatone(2000.0, fs=8000)
        assert low.support_len > high.support_len

    def test_support_scales_with_sample_rate(self):
        """Test support in samples scales with fs."""
        a = make_gammatone(500.0, fs=8000)
        b = make_gammatone(500.0, fs=16000)
        assert b.support_len == pytest.approx(2 * a.support_len, rel=0.02)

    def test_aliasing_rejected(self):
        """Test center frequency at or above Nyquist is refused."""
        with pytest.raises(AliasingError):
            make_gammatone(4000.0, fs=8000)

    def test_aliasing_is_config_error(self):
        """AliasingError maps to the usage exit code."""
        with pytest.raises(ConfigError):
            make_gammatone(5000.0, fs=8000)

    @pytest.mark.parametrize("kwargs", [
        {"f_center": -10.0},
        {"f_center": 100.0, "order": 0},
        {"f_center": 100.0, "bandwidth": -1.0},
        {"f_center": 100.0, "trunc_rel": 0.0},
    ])
    def test_bad_parameters(self, kwargs):
        """Test invalid order and bandwidth."""
        with pytest.raises(ConfigError):
            make_gammatone(fs=8000, **kwargs)

    def test_phase_changes_waveform(self):
        """Test phase shifts the carrier."""
        a = make_gammatone(500.0, fs=8000, phase=0.0)
        b = make_gammatone(500.0, fs=8000, phase=np.pi / 2)
        assert not np.allclose(a.samples, b.samples)

    def test_phase_pi_negates(self):
        """Phase pi negates the kernel."""
        a = make_gammatone(500.0, fs=44100, phase=0.0)
        b = make_gammatone(500.0, fs=44100, phase=np.pi)
        assert a.support_len == b.support_len
        assert np.allclose(b.samples, -a.samples, atol=1e-12)

    def test_spectrum_peaks_at_center(self):
        """Test magnitude spectrum peaks near the center frequency."""
        k = make_gammatone(500.0, fs=44100)
        spectrum = np.abs(np.fft.rfft(k.samples))
        freqs = np.fft.rfftfreq(k.support_len, d=1.0 / 44100)
        assert abs(freqs[np.argmax(spectrum)] - 500.0) <= 44100 / k.support_len


class TestErbSpace:
    """ERB-rate center frequencies."""

    def test_endpoints_and_order(self):
        """Test ERB spacing hits both endpoints in increasing order."""
        f = erb_space(100.0, 3000.0, 10)
        assert f.size == 10
        assert f[0] == pytest.approx(100.0)
        assert f[-1] == pytest.approx(3000.0)
        assert np.all(np.diff(f) > 0)

    def test_spacing_widens_with_frequency(self):
        """Test spacing grows with frequency."""
        f = erb_space(50.0, 20000.0, 40)
        gaps = np.diff(f)
        assert np.all(np.diff(gaps) > 0)

    def test_single_band(self):
        """One band sits at the low edge."""
        assert erb_space(200.0, 4000.0, 1).tolist() == [200.0]

    def test_invalid_range(self):
        """Test an inverted range raises."""
        with pytest.raises(ConfigError):
            erb_space(3000.0, 100.0, 5)


class TestSimpleKernels:
    """Explicit-waveform kernels."""

    def test_rect_kernel_values(self):
        """Test rect kernel is constant with unit norm."""
        k = rect_kernel(4, fs=8000)
        assert np.allclose(k.samples, np.sqrt(8000 / 4))

    def test_sine_cycle_norm(self):
        """Test one sine cycle normalizes to unit norm."""
        k = sine_cycle_kernel(80, fs=8000)
        assert sampled_norm(k.samples, 8000) == pytest.approx(1.0, abs=1e-12)

    def test_kernel_rejects_unnormalized(self):
        """Unnormalized samples are refused."""
        with pytest.raises(ConfigError):
            Kernel(id=0, samples=np.ones(4), fs=8000)

    def test_kernel_samples_read_only(self):
        """Test kernel samples cannot be written."""
        k = rect_kernel(4, fs=8000)
        with pytest.raises(ValueError):
            k.samples[0] = 0.0


class TestBankSpec:
    """Bank spec text and bank construction."""

    def test_parse_gammatone_lines(self):
        """Test gammatone records with defaults filled in."""
        text = """
        # two kernels
        gammatone f=200 n=4 b=auto phase=0
        gammatone f=1000 n=3 b=150 phase=1.5   # explicit bandwidth
        """
        records = parse_bank_spec(text, 8000)
        assert records == [
            GammatoneSpec(f=200.0, n=4, b=None, phase=0.0),
            GammatoneSpec(f=1000.0, n=3, b=150.0, phase=1.5),
        ]

    def test_parse_erb_record(self):
        """Test an erb record expands to count kernels."""
        records = parse_bank_spec("erb count=5 low=100 high=2000", 8000)
        assert len(records) == 5
        assert records[0].f == pytest.approx(100.0)
        assert records[-1].f == pytest.approx(2000.0)

    def test_erb_high_auto(self):
        """Test erb high defaults to a fraction of fs."""
        records = parse_bank_spec("erb count=3 low=100", 8000)
        assert records[-1].f == pytest.approx(0.45 * 8000)

    def test_unknown_key(self):
        """Unknown key names its line."""
        with pytest.raises(ConfigError):
            parse_bank_spec("gammatone f=200 q=3", 8000)

    def test_unknown_record(self):
        """Test unknown record type is refused."""
        with pytest.raises(ConfigError):
            parse_bank_spec("gabor f=200", 8000)

    def test_empty_spec(self):
        """Test a spec with only comments is refused."""
        with pytest.raises(ConfigError):
            parse_bank_spec("# nothing here\n", 8000)

    def test_line_roundtrip(self):
        """Test to_line output parses back to the same record."""
        spec = GammatoneSpec(f=440.0, n=4, b=None, phase=0.0)
        assert parse_bank_spec(spec.to_line(), 8000) == [spec]

    def test_missing_file(self, tmp_path):
        """Missing bank file raises."""
        with pytest.raises(FormatError):
            load_bank_spec(str(tmp_path / "missing.txt"), 8000)

    def test_load_file(self, tmp_path):
        """Test a bank loads from file."""
        path = tmp_path / "bank.txt"
        path.write_text("gammatone f=300\ngammatone f=900\n")
        bank = load_bank_spec(str(path), 8000)
        assert bank.m == 2
        assert [k.id for k in bank.kernels] == [0, 1]

    def test_duplicate_records(self):
        """Test duplicate kernels are refused."""
        with pytest.raises(ConfigError):
            build_bank([GammatoneSpec(f=300.0), GammatoneSpec(f=300.0)], 8000)

    def test_empty_bank(self):
        """Test build_bank needs at least one kernel."""
        with pytest.raises(ConfigError):
            build_bank([], 8000)

    def test_mixed_records(self):
        """Test gammatone specs, raw samples and kernels mix in one bank."""
        bank = build_bank([GammatoneSpec(f=300.0), np.ones(16), rect_kernel(8, 8000)], 8000)
        assert bank.supports.tolist()[1:] == [16, 8]


class TestBankHash:
    """Bank identity for spike-file compatibility."""

    def test_hash_is_stable(self):
        """Same bank, same hash."""
        a = default_bank({"count": 4, "low_hz": 100.0}, fs=8000)
        b = default_bank({"count": 4, "low_hz": 100.0}, fs=8000)
        assert a.bank_hash == b.bank_hash
        assert len(a.hash_hex()) == 16

    def test_hash_tracks_content(self):
        """Test any kernel change moves the hash."""
        a = default_bank({"count": 4, "low_hz": 100.0}, fs=8000)
        b = default_bank({"count": 4, "low_hz": 120.0}, fs=8000)
        assert a.bank_hash != b.bank_hash

    def test_check_hash(self, small_bank):
        """Test check_hash raises on a foreign hash."""
        small_bank.check_hash(small_bank.bank_hash)
        with pytest.raises(CompatibilityError):
            small_bank.check_hash(small_bank.bank_hash ^ 1)


class TestScatter:
    """Spike waveform placement."""

    def test_waveform_is_reversed_kernel(self, small_bank):
        """Test spike waveform is the time-reversed kernel ending at the spike."""
        j = 2
        L = small_bank[j].support_len
        w = small_bank.waveform(j, L + 10, 2 * L + 20)
        assert np.array_equal(w[11:L + 11], small_bank[j].samples[::-1])
        assert not np.any(w[:11]) and not np.any(w[L + 11:])

    def test_clipped_at_edges(self, small_bank):
        """Test waveforms near the buffer start are clipped."""
        L = small_bank[0].support_len
        w = small_bank.waveform(0, 3, 10)
        assert np.array_equal(w[:4], small_bank[0].samples[3::-1])
        assert not np.any(w[4:])
        assert not np.any(small_bank.waveform(0, L + 50, 10))


class TestCorrTable:
    """Cross-correlation table."""

    def _direct(self, bank, j, k, lag):
        origin = int(bank.supports[j] + bank.supports[k])
        length = origin + int(bank.supports[k]) + abs(lag) + 1
        a = bank.waveform(j, origin, length)
        b = bank.waveform(k, origin + lag, length)
        return float(a @ b) / bank.fs

    def test_matches_direct_inner_products(self, small_bank, small_table, rng):
        """Test table entries against direct inner products."""
        for _ in range(50):
            j, k = (int(x) for x in rng.integers(small_bank.m, size=2))
            lo, hi = small_table.lag_range(j, k)
            lag = int(rng.integers(lo, hi + 1))
            assert small_table.value(j, k, lag) == pytest.approx(self._direct(small_bank, j, k, lag), abs=1e-10)

    def test_symmetry_is_exact(self, small_bank, small_table):
        """Test value(j, k, l) equals value(k, j, -l) exactly."""
        lags = np.arange(-50, 51)
        for j in range(small_bank.m):
            for k in range(small_bank.m):
                assert np.array_equal(small_table.lookup(j, k, lags), small_table.lookup(k, j, -lags))

    def test_unit_diagonal(self, small_bank, small_table):
        """Zero-lag autocorrelation is exactly 1."""
        for j in range(small_bank.m):
            assert small_table.value(j, j, 0) == 1.0

    def test_zero_outside_support(self, small_bank, small_table):
        """Test lags beyond the supports read 0."""
        lo, hi = small_table.lag_range(0, 1)
        assert small_table.value(0, 1, lo - 1) == 0.0
        assert small_table.value(0, 1, hi + 1) == 0.0

    def test_thread_count_does_not_change_values(self, small_bank, small_table):
        """Test threaded table build is identical."""
        threaded = cross_corr_table(small_bank, threads=3)
        assert np.array_equal(threaded.values, small_table.values)

    def test_rect_kernel_triangle(self):
        """Test rect kernels correlate as a triangle."""
        bank = build_bank([rect_kernel(4, 8000)], 8000)
        table = cross_corr_table(bank)
        values = table.lookup(0, 0, np.arange(-4, 5))
        assert np.allclose(values, [0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0])

    def test_bank_mismatch(self, small_table):
        """Test check_bank refuses another bank."""
        with pytest.raises(CompatibilityError):
            small_table.check_bank(small_table.bank_hash ^ 1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
