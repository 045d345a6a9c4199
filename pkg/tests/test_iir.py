from __future__ import annotations

import numpy as np
import pytest
from scipy import signal as sps

from ecgscrub.iir import (
    Biquad,
    BiquadChain,
    FilterKind,
    IirSpec,
    apply,
    default_padlen,
    design,
    lowpass_demo,
    response,
)
from ecgscrub.signal import Signal

FS = 360.0
HP3 = IirSpec(FilterKind.HIGHPASS, 3.0, 4)


def db(v):
    return 20 * np.log10(np.abs(v))


def analytic_gain(kind, fc, order, f, fs=FS):
    """Butterworth magnitude after the pre-warped bilinear map."""
    ratio = np.tan(np.pi * np.asarray(f) / fs) / np.tan(np.pi * fc / fs)
    if kind is FilterKind.HIGHPASS:
        ratio = 1 / ratio
    return 1 / np.sqrt(1 + ratio ** (2 * order))


class TestDesign:
    @pytest.mark.parametrize("kind,fc,order", [("highpass", 3.0, 4), ("lowpass", 40.0, 4), ("highpass", 0.5, 2),
                                                ("lowpass", 100.0, 5), ("highpass", 10.0, 1)])
    def test_matches_analytic_and_scipy(self, kind, fc, order):
        spec = IirSpec(kind, fc, order)
        chain = design(spec, FS)
        f = np.linspace(0.01, 179.9, 400)
        h = response(chain, f, FS)
        np.testing.assert_allclose(np.abs(h), analytic_gain(spec.kind, fc, order, f), rtol=1e-9, atol=1e-14)
        _, ref = sps.sosfreqz(sps.butter(order, fc, btype=kind, fs=FS, output="sos"), worN=f, fs=FS)
        np.testing.assert_allclose(h, ref, rtol=1e-9, atol=1e-14)

    def test_highpass_3hz_contract(self):
        chain = design(HP3, FS)
        assert db(response(chain, [3.0], FS)[0]) == pytest.approx(-3.0103, abs=0.1)
        assert db(response(chain, [0.05], FS)[0]) < -60

    def test_lowpass_dc_gain(self):
        chain = design(IirSpec("lowpass", 40.0, 4), FS)
        assert abs(db(response(chain, [0.0], FS)[0])) < 1e-6

    def test_sections_stable(self):
        for kind in FilterKind:
            for order in range(1, 9):
                for fc in (0.3, 3.0, 60.0, 170.0):
                    chain = design(IirSpec(kind, fc, order), FS)
                    assert all(s.stable for s in chain.sections)
                    poles = np.concatenate([np.roots([1, s.a1, s.a2]) for s in chain.sections])
                    assert np.all(np.abs(poles) < 1)

    def test_unstable_section_rejected(self):
        with pytest.raises(ValueError, match="unstable"):
            BiquadChain((Biquad(1, 0, 0, 0.0, 1.2),), 1.0, 2)

    def test_cutoff_above_nyquist(self):
        with pytest.raises(ValueError, match="cutoff above Nyquist"):
            design(IirSpec("highpass", 180.0, 4), FS)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            IirSpec("highpass", 3.0, 0)
        with pytest.raises(ValueError):
            IirSpec("highpass", -1.0)
        with pytest.raises(ValueError):
            IirSpec("bandpass", 3.0)

    def test_impulse_decays(self):
        for kind, fc in (("highpass", 3.0), ("lowpass", 40.0), ("highpass", 0.5)):
            chain = design(IirSpec(kind, fc, 4), FS)
            slowest = max(max(abs(r) for r in np.roots([1, s.a1, s.a2])) for s in chain.sections)
            tau = -1 / np.log(slowest)
            imp = np.zeros(int(12 * tau) + 10)
            imp[0] = 1.0
            y = sps.sosfilt(chain.sos(), imp)
            # envelope r**n is e**-10 at 10 tau; repeated poles add a polynomial factor
            assert np.abs(y[int(10 * tau) :]).max() < 1e-3 * np.abs(y).max()
            # 1e-12 needs ln(1e12) ~ 28 time constants
            long = np.zeros(int(40 * tau))
            long[0] = 1.0
            assert np.abs(sps.sosfilt(chain.sos(), long)[-int(tau) :]).max() < 1e-12


class TestApply:
    def test_dc_removed(self):
        x = Signal(np.full(3600, 2.5), FS)
        y = apply(x, design(HP3, FS))
        assert np.abs(y.samples).max() < 1e-3 * 2.5

    def test_50hz_amplitude_and_lag(self):
        t = np.arange(7200) / FS
        x = np.sin(2 * np.pi * 50 * t)
        y = apply(Signal(x, FS), design(HP3, FS)).samples
        mid = slice(1800, 5400)
        assert np.abs(y[mid]).max() == pytest.approx(1.0, rel=0.01)
        lags = np.arange(-5, 6)
        xc = [np.dot(x[mid], np.roll(y, -k)[mid]) for k in lags]
        assert lags[int(np.argmax(xc))] == 0

    def test_zero_phase_equals_squared_magnitude(self):
        chain = design(HP3, FS)
        t = np.arange(36000) / FS
        for f in (1.5, 3.0, 7.0):
            x = np.cos(2 * np.pi * f * t)
            y = apply(Signal(x, FS), chain).samples
            g = np.abs(response(chain, [f], FS)[0]) ** 2
            mid = slice(12000, 24000)
            np.testing.assert_allclose(y[mid], g * x[mid], atol=1e-6)

    def test_baseline_tone_attenuated(self):
        # steady-state interior; the edges carry the padding transient
        chain = design(HP3, FS)
        t = np.arange(int(60 * FS)) / FS
        y = apply(Signal(np.sin(2 * np.pi * 0.3 * t), FS), chain).samples
        assert db(np.abs(y[3600:-3600]).max()) < -60

    def test_linear(self, rng):
        chain = design(HP3, FS)
        x, z = rng.standard_normal(2000), rng.standard_normal(2000)
        a, b = 1.7, -0.4
        for zp in (True, False):
            lhs = apply(Signal(a * x + b * z, FS), chain, zp).samples
            rhs = a * apply(Signal(x, FS), chain, zp).samples + b * apply(Signal(z, FS), chain, zp).samples
            np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_time_invariant_single_pass(self, rng):
        chain = design(IirSpec("lowpass", 40.0, 4), FS)
        x = np.concatenate([np.zeros(50), rng.standard_normal(500)])
        y = apply(Signal(x, FS), chain, zero_phase=False).samples
        ys = apply(Signal(np.concatenate([np.zeros(30), x]), FS), chain, zero_phase=False).samples
        np.testing.assert_allclose(ys[30:], y, atol=1e-12)

    def test_group_delay_below_half_sample(self):
        chain = design(IirSpec("lowpass", 40.0, 4), FS)
        t = np.arange(7200) / FS
        x = np.sin(2 * np.pi * 20 * t)
        y = apply(Signal(x, FS), chain).samples
        mid = slice(1800, 5400)
        # delay from the phase of the fitted sinusoid
        basis = np.column_stack([np.sin(2 * np.pi * 20 * t[mid]), np.cos(2 * np.pi * 20 * t[mid])])
        s, c = np.linalg.lstsq(basis, y[mid], rcond=None)[0]
        delay_samples = -np.arctan2(c, s) / (2 * np.pi * 20) * FS
        assert abs(delay_samples) < 0.5

    def test_padding_and_length(self):
        chain = design(HP3, FS)
        assert default_padlen(chain) == 24
        with pytest.raises(ValueError, match="too short"):
            apply(Signal(np.ones(24), FS), chain)
        assert len(apply(Signal(np.ones(25), FS), chain)) == 25

    def test_lowpass_demo_single_pass(self, rng):
        x = Signal(rng.standard_normal(500), FS)
        y = lowpass_demo(x, 40.0)
        ref = sps.sosfilt(sps.butter(4, 40.0, fs=FS, output="sos"), x.samples)
        np.testing.assert_allclose(y.samples, ref, atol=1e-12)
