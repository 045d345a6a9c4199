"""Butterworth low/high-pass design as second-order sections, and application."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import signal as sps

from .signal import Signal


class FilterKind(str, Enum):
    LOWPASS = "lowpass"
    HIGHPASS = "highpass"


@dataclass(frozen=True)
class IirSpec:
    kind: FilterKind
    cutoff: float
    order: int = 4
    zero_phase: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if self.order < 1:
            raise ValueError("filter order must be >= 1")
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")


@dataclass(frozen=True)
class Biquad:
    b0: float
    b1: float
    b2: float
    a1: float
    a2: float

    @property
    def stable(self) -> bool:
        return abs(self.a2) < 1 and abs(self.a1) < 1 + self.a2


@dataclass(frozen=True)
class BiquadChain:
    sections: tuple[Biquad, ...]
    gain: float
    order: int

    def __post_init__(self):
        for s in self.sections:
            if not s.stable:
                raise ValueError(f"unstable section {s}")

    def sos(self) -> np.ndarray:
        """scipy-style ``(n_sections, 6)`` array with the gain folded into section 0."""
        rows = np.array([[s.b0, s.b1, s.b2, 1.0, s.a1, s.a2] for s in self.sections])
        rows[0, :3] *= self.gain
        return rows


def design(spec: IirSpec, fs: float) -> BiquadChain:
    """Butterworth prototype mapped through the pre-warped bilinear transform."""
    if spec.cutoff >= fs / 2:
        raise ValueError(f"cutoff above Nyquist: {spec.cutoff} Hz >= {fs / 2} Hz")
    n = spec.order
    warped = 2 * fs * np.tan(np.pi * spec.cutoff / fs)
    k = np.arange(n)
    proto = np.exp(1j * np.pi * (2 * k + n + 1) / (2 * n))  # unit-circle left-half-plane poles
    if spec.kind is FilterKind.LOWPASS:
        analog = warped * proto
        zero = -1.0
    else:
        analog = warped / proto
        zero = 1.0
    poles = (2 * fs + analog) / (2 * fs - analog)

    # evaluate gain at DC for low-pass, at Nyquist for high-pass
    z_ref = 1.0 if spec.kind is FilterKind.LOWPASS else -1.0
    sections = []
    upper = sorted((p for p in poles if p.imag > 1e-12), key=lambda p: -abs(p))
    for p in upper:
        a1, a2 = -2 * p.real, abs(p) ** 2
        b = (1.0, -2 * zero, 1.0)
        sections.append(_unit_gain(b, a1, a2, z_ref))
    real_poles = [p.real for p in poles if abs(p.imag) <= 1e-12]
    for p in real_poles:
        sections.append(_unit_gain((1.0, -zero, 0.0), -p, 0.0, z_ref))
    return BiquadChain(tuple(sections), 1.0, n)


def _unit_gain(b, a1, a2, z_ref) -> Biquad:
    num = b[0] + b[1] / z_ref + b[2] / z_ref**2
    den = 1.0 + a1 / z_ref + a2 / z_ref**2
    g = den / num
    return Biquad(b[0] * g, b[1] * g, b[2] * g, a1, a2)


def response(chain: BiquadChain, freqs, fs: float) -> np.ndarray:
    """Complex single-pass frequency response at ``freqs`` (Hz)."""
    z = np.exp(2j * np.pi * np.asarray(freqs, dtype=float) / fs)
    h = np.full(z.shape, chain.gain, dtype=complex)
    for s in chain.sections:
        h *= (s.b0 + s.b1 / z + s.b2 / z**2) / (1 + s.a1 / z + s.a2 / z**2)
    return h


def default_padlen(chain: BiquadChain) -> int:
    return 3 * (2 * chain.order)


def apply(signal: Signal, chain: BiquadChain, zero_phase: bool = True, padlen: int | None = None) -> Signal:
    """Filter ``signal``.

    ``zero_phase`` runs the chain forward and backward over a mirror-padded
    copy, squaring the magnitude response and cancelling phase.  ``padlen``
    defaults to three times the filter's pole count.
    """
    sos = chain.sos()
    x = signal.samples
    if not zero_phase:
        return signal.with_samples(sps.sosfilt(sos, x))
    pad = default_padlen(chain) if padlen is None else int(padlen)
    if x.size <= pad:
        raise ValueError(f"signal too short for zero-phase padding: {x.size} <= {pad}")
    return signal.with_samples(sps.sosfiltfilt(sos, x, padtype="even", padlen=pad))


def lowpass_demo(signal: Signal, cutoff: float, order: int = 4) -> Signal:
    """Single-pass low-pass, the plain baseline used for comparison plots."""
    chain = design(IirSpec(FilterKind.LOWPASS, cutoff, order, zero_phase=False), signal.fs)
    return apply(signal, chain, zero_phase=False)
