"""Noise generation and mixing, plus a synthetic clean ECG for offline work."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signal import Signal

# Generator used for every seeded draw; recorded in bench output headers.
RNG_ALGORITHM = "numpy.random.PCG64 via default_rng(seed).standard_normal"


def awgn(n: int, seed: int, fs: float = 360.0) -> Signal:
    """Zero-mean, unit-variance white Gaussian noise, deterministic in ``seed``."""
    if n < 1:
        raise ValueError("noise length must be >= 1")
    rng = np.random.default_rng(seed)
    return Signal(rng.standard_normal(n), fs)


def mix_at_snr(clean: Signal, noise: Signal, snr_db: float) -> Signal:
    """Add ``noise`` scaled so that the clean-to-noise energy ratio is ``snr_db``."""
    if len(clean) != len(noise):
        raise ValueError(f"length mismatch: {len(clean)} vs {len(noise)}")
    if clean.fs != noise.fs:
        raise ValueError(f"sampling rate mismatch: {clean.fs} vs {noise.fs}")
    p_noise = float(np.sum(noise.samples**2))
    if p_noise == 0.0:
        raise ValueError("noise has zero power")
    p_clean = float(np.sum(clean.samples**2))
    gain = math.sqrt(p_clean / (p_noise * 10.0 ** (snr_db / 10.0)))
    return Signal(clean.samples + gain * noise.samples, clean.fs)


# Wave shape of the ECGSYN dynamical model (McSharry et al., 2003): angular
# position of each wave within the beat, its ODE gain a_i and width b_i
# (radians).  The stationary amplitude of each bump is proportional to
# a_i * b_i**2; the summed template is rescaled so the R peak is 1 mV.
_WAVES = ("P", "Q", "R", "S", "T")
_THETA = np.array([-np.pi / 3, -np.pi / 12, 0.0, np.pi / 12, np.pi / 2])
_GAIN = np.array([1.2, -5.0, 30.0, -7.5, 0.75])
_WIDTH = np.array([0.25, 0.1, 0.1, 0.1, 0.4])
_AMPLITUDE = _GAIN * _WIDTH**2 / (_GAIN[2] * _WIDTH[2] ** 2)


def synth_ecg(duration: float, fs: float = 360.0, heart_rate: float = 72.0) -> Signal:
    """Periodic five-bump synthetic ECG with R peaks at the middle of each beat.

    The first R peak sits half an R-R interval after ``t = 0`` so every
    beat lies fully inside the window when the duration is a whole number
    of beats.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if not 20 <= heart_rate <= 220:
        raise ValueError("heart rate must lie in [20, 220] bpm")
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    beat_hz = heart_rate / 60.0
    # phase 0 at each R peak, wrapped into [-pi, pi)
    phase = 2 * np.pi * (t * beat_hz - 0.5)
    phase = (phase + np.pi) % (2 * np.pi) - np.pi
    return Signal(_template(phase) / _template(np.zeros(1))[0], fs)


def _template(phase: np.ndarray) -> np.ndarray:
    x = np.zeros(phase.shape)
    for theta, amp, width in zip(_THETA, _AMPLITUDE, _WIDTH):
        d = (phase - theta + np.pi) % (2 * np.pi) - np.pi
        x += amp * np.exp(-(d**2) / (2 * width**2))
    return x


class NoiseKind(str, Enum):
    AWGN = "awgn"
    BW = "bw"
    MA = "ma"


@dataclass(frozen=True)
class NoiseSource:
    """Where segment noise comes from.

    For ``AWGN`` each segment ``i`` draws from ``seed + i``.  For record
    noise (``BW``/``MA``) the samples are taken from ``record`` starting at
    ``offset`` and advancing one segment at a time, wrapping at the end.
    """

    kind: NoiseKind
    seed: int = 0
    record: Signal | None = None
    channel: int = 0
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.kind is not NoiseKind.AWGN and self.record is None:
            raise ValueError(f"{self.kind.value} noise needs a loaded noise record")

    def segment(self, index: int, n: int, fs: float) -> Signal:
        if self.kind is NoiseKind.AWGN:
            return awgn(n, self.seed + index, fs)
        rec = self.record
        if rec.fs != fs:
            raise ValueError(f"noise record at {rec.fs} Hz, signal at {fs} Hz")
        if len(rec) < n:
            raise ValueError("noise record shorter than one segment")
        start = (self.offset + index * n) % len(rec)
        idx = (start + np.arange(n)) % len(rec)
        return Signal(rec.samples[idx], fs)

    def describe(self) -> str:
        if self.kind is NoiseKind.AWGN:
            return f"awgn seed={self.seed} rng={RNG_ALGORITHM}"
        return f"{self.kind.value} channel={self.channel} offset={self.offset}"
