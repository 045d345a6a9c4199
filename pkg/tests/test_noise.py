from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import find_peaks

from ecgscrub.lilliefors import lilliefors_test
from ecgscrub.metrics import snr_improvement
from ecgscrub.noise import NoiseKind, NoiseSource, awgn, mix_at_snr, synth_ecg
from ecgscrub.signal import Signal


class TestAwgn:
    def test_moments(self):
        x = awgn(10**6, 1).samples
        assert abs(x.mean()) < 0.005
        assert 0.99 <= x.var() <= 1.01

    def test_deterministic(self):
        np.testing.assert_array_equal(awgn(1000, 9).samples, awgn(1000, 9).samples)
        assert not np.array_equal(awgn(1000, 9).samples, awgn(1000, 10).samples)

    def test_whiteness(self):
        x = awgn(10**5, 3).samples
        x = x - x.mean()
        denom = np.dot(x, x)
        for lag in range(1, 101):
            assert abs(np.dot(x[:-lag], x[lag:]) / denom) < 0.05

    def test_passes_gaussianity_test(self):
        passed = sum(lilliefors_test(awgn(3600, s).samples, 0.05).is_gaussian for s in range(1000))
        assert passed >= 930

    def test_bad_length(self):
        with pytest.raises(ValueError):
            awgn(0, 1)


class TestMix:
    @pytest.mark.parametrize("snr", [0.0, 10.0, -3.0, 24.5])
    def test_power_ratio(self, clean_ecg, snr):
        noise = awgn(len(clean_ecg), 4)
        mixed = mix_at_snr(clean_ecg, noise, snr)
        scaled = mixed.samples - clean_ecg.samples
        ratio = np.sum(clean_ecg.samples**2) / np.sum(scaled**2)
        assert ratio == pytest.approx(10 ** (snr / 10), rel=1e-10)

    def test_snr_roundtrip(self, clean_ecg):
        noise = awgn(len(clean_ecg), 8)
        for snr in (0.0, 5.0, 10.0):
            mixed = mix_at_snr(clean_ecg, noise, snr)
            snr_in, _, _ = snr_improvement(clean_ecg, mixed, mixed.samples + 1e-3)
            assert snr_in == pytest.approx(snr, abs=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-20, 40))
    def test_added_part_proportional_to_noise(self, seed, snr):
        r = np.random.default_rng(seed)
        clean = Signal(r.standard_normal(256), 360)
        noise = Signal(r.standard_normal(256), 360)
        added = mix_at_snr(clean, noise, snr).samples - clean.samples
        ratio = added / noise.samples
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)

    def test_errors(self, clean_ecg):
        with pytest.raises(ValueError, match="zero power"):
            mix_at_snr(clean_ecg, Signal(np.zeros(len(clean_ecg)), 360), 10)
        with pytest.raises(ValueError, match="length"):
            mix_at_snr(clean_ecg, awgn(10, 1), 10)


class TestSynth:
    def test_r_peaks_at_60_bpm(self):
        x = synth_ecg(10.0, 360.0, 60.0).samples
        peaks, _ = find_peaks(x, height=0.5)
        assert len(peaks) == 10
        assert np.all(np.abs(np.diff(peaks) - 360) <= 1)

    def test_r_is_beat_maximum(self):
        x = synth_ecg(10.0, 360.0, 60.0).samples
        for beat in x.reshape(10, 360):
            peak = int(np.argmax(beat))
            assert beat[peak] == pytest.approx(1.0, abs=1e-3)
            assert abs(peak - 180) <= 1

    def test_band_limited(self):
        x = synth_ecg(10.0, 360.0, 72.0).samples
        spec = np.abs(np.fft.rfft(x)) ** 2
        f = np.fft.rfftfreq(x.size, 1 / 360.0)
        assert spec[f > 100].sum() < 0.01 * spec.sum()

    def test_deterministic(self):
        np.testing.assert_array_equal(synth_ecg(5.0).samples, synth_ecg(5.0).samples)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            synth_ecg(0.0)
        with pytest.raises(ValueError):
            synth_ecg(5.0, heart_rate=10)
        with pytest.raises(ValueError):
            synth_ecg(5.0, heart_rate=300)


class TestNoiseSource:
    def test_awgn_segments_use_distinct_seeds(self):
        src = NoiseSource(NoiseKind.AWGN, seed=100)
        np.testing.assert_array_equal(src.segment(3, 50, 360).samples, awgn(50, 103).samples)

    def test_record_noise_advances_and_wraps(self):
        rec = Signal(np.arange(100.0), 360)
        src = NoiseSource("bw", record=rec, offset=10)
        np.testing.assert_array_equal(src.segment(0, 30, 360).samples, np.arange(10, 40.0))
        np.testing.assert_array_equal(src.segment(3, 30, 360).samples, np.r_[np.arange(100, 130.0)] % 100)
        assert "offset=10" in src.describe()

    def test_record_noise_requires_record(self):
        with pytest.raises(ValueError):
            NoiseSource(NoiseKind.MA)

    def test_rate_mismatch(self):
        src = NoiseSource("ma", record=Signal(np.ones(100), 250))
        with pytest.raises(ValueError):
            src.segment(0, 10, 360)
