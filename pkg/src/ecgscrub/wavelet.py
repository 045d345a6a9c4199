"""Undecimated wavelet multiresolution analysis and threshold denoising.

The transform is the maximal-overlap (stationary) form of the orthogonal
two-channel filter bank: level ``j`` applies the low-pass filter ``j - 1``
times and the high-pass once, each upsampled by ``2**(l)`` at step ``l``,
without downsampling.  Everything is done as circular convolution in the
frequency domain, on either the raw signal (``boundary="periodic"``) or its
half-sample mirror image of twice the length (``boundary="symmetric"``).

MRA components are then zero-phase band-pass images of the input whose
squared gains telescope to one, so they sum back to the input to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signal import (
    Component,
    Decomposition,
    DecompositionKind,
    Signal,
    approximation,
    detail,
    sum_components,
)

SQRT2 = np.sqrt(2.0)

# Fejer-Korovkin, 14 taps.  Generated by `fejer_korovkin(14)` at 120 digits
# and rounded to the nearest double; test_wavelet regenerates and compares.
FK14_H0 = np.array([
    0.2603717693037009,
    0.686891477246636,
    0.6115546539472099,
    0.05142165412892757,
    -0.2456139281610015,
    -0.048575339077288754,
    0.12428256092000188,
    0.02222673961876614,
    -0.06399737303879399,
    -0.005074372547497621,
    0.029779711589290988,
    -0.0032974791532950297,
    -0.009270613373860545,
    0.0035141009702991523,
])


@dataclass(frozen=True)
class FilterBank:
    """Orthogonal two-channel filter bank.

    ``h1`` is derived from ``h0`` by the quadrature-mirror rule
    ``h1[n] = (-1)**n * h0[L - 1 - n]``.
    """

    name: str
    h0: np.ndarray

    def __post_init__(self):
        h0 = np.array(self.h0, dtype=np.float64).ravel()
        if h0.size < 2 or h0.size % 2:
            raise ValueError("orthogonal filters need an even number of taps")
        if abs(h0.sum() - SQRT2) > 1e-10:
            raise ValueError(f"{self.name}: low-pass taps sum to {h0.sum()!r}, expected sqrt(2)")
        h0.setflags(write=False)
        object.__setattr__(self, "h0", h0)

    @property
    def h1(self) -> np.ndarray:
        n = np.arange(self.h0.size)
        return (-1.0) ** n * self.h0[::-1]

    def __len__(self) -> int:
        return self.h0.size


FK14 = FilterBank("fk14", FK14_H0)
BANKS = {"fk14": FK14}


def get_bank(name: str) -> FilterBank:
    try:
        return BANKS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown filter bank {name!r}; available: {sorted(BANKS)}") from None


def fejer_korovkin(length: int, dps: int = 80) -> list:
    """Fejer-Korovkin low-pass taps of even ``length``, as mpmath numbers.

    The squared gain is the ideal half-band indicator smoothed by the
    Fejer-Korovkin kernel of degree ``length``, restricted to its odd
    harmonics and renormalised to unit gain at DC.  The taps are the
    minimum-phase spectral factor, scaled to sum to sqrt(2).
    """
    import mpmath as mp

    if length < 4 or length % 2:
        raise ValueError("length must be even and >= 4")
    with mp.workdps(dps):
        n = length
        th = mp.pi / (n + 2)

        def kernel_coef(k):
            return ((n - k + 3) * mp.sin((k + 1) * th) - (n - k + 1) * mp.sin((k - 1) * th)) / (
                2 * (n + 2) * mp.sin(th)
            )

        odd = {k: kernel_coef(k) * mp.sin(k * mp.pi / 2) / k for k in range(1, length, 2)}
        norm = 2 * sum(odd.values())
        autocorr = [mp.mpf(0)] * (2 * length - 1)
        autocorr[length - 1] = mp.mpf(1)
        for k, v in odd.items():
            autocorr[length - 1 + k] = autocorr[length - 1 - k] = v / norm

        roots = mp.polyroots(autocorr[::-1], maxsteps=4000, extraprec=20 * dps)
        on_circle = [z for z in roots if abs(abs(z) - 1) < mp.mpf(10) ** (-dps // 8)]
        inside = [z for z in roots if abs(z) < 1 - mp.mpf(10) ** (-dps // 8)]
        # zeros on the circle are all at z = -1 and come in pairs
        chosen = inside + [mp.mpf(-1)] * (len(on_circle) // 2)
        poly = [mp.mpc(1)]
        for z in chosen:
            poly = [
                (poly[i] if i < len(poly) else 0) - (z * poly[i - 1] if i else 0)
                for i in range(len(poly) + 1)
            ]
        taps = [c.real for c in poly]
        scale = mp.sqrt(2) / sum(taps)
        return [t * scale for t in taps]


class ThresholdRule(str, Enum):
    UNIVERSAL = "universal"


class Shrinkage(str, Enum):
    SOFT = "soft"


@dataclass(frozen=True)
class DenoiseSpec:
    level: int
    threshold_rule: ThresholdRule = ThresholdRule.UNIVERSAL
    shrinkage: Shrinkage = Shrinkage.SOFT
    threshold_scale: float = 1.0  # 0 disables shrinkage entirely

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("denoising level must be >= 1")
        if self.threshold_scale < 0:
            raise ValueError("threshold_scale must be non-negative")
        object.__setattr__(self, "threshold_rule", ThresholdRule(self.threshold_rule))
        object.__setattr__(self, "shrinkage", Shrinkage(self.shrinkage))


def _extend(x: np.ndarray, boundary: str) -> np.ndarray:
    if boundary == "symmetric":
        return np.concatenate([x, x[::-1]])
    if boundary == "periodic":
        return x
    raise ValueError(f"unknown boundary mode {boundary!r}")


def _response(h: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """MODWT-normalised frequency response of ``h`` at ``freqs`` (cycles/sample)."""
    n = np.arange(h.size)
    return np.exp(-2j * np.pi * np.outer(freqs, n)) @ h / SQRT2


def _level_responses(bank: FilterBank, m: int, levels: int):
    """Per-level wavelet responses and the final scaling response on the rfft grid."""
    freqs = np.fft.rfftfreq(m)
    low_prod = np.ones(freqs.size, dtype=complex)
    highs = []
    for j in range(levels):
        f = (freqs * 2**j) % 1.0
        highs.append(_response(bank.h1, f) * low_prod)
        low_prod = low_prod * _response(bank.h0, f)
    return highs, low_prod


def _check_levels(n: int, levels: int, boundary: str = "periodic") -> None:
    # the analysis window (after mirroring) must span the coarsest dyadic scale
    if levels < 1:
        raise ValueError("levels must be >= 1")
    window = 2 * n if boundary == "symmetric" else n
    if window < 2**levels:
        raise ValueError(f"insufficient length for levels: {window}-sample {boundary} window < 2**{levels}")


def mra_decompose(
    signal: Signal,
    levels: int,
    bank: FilterBank = FK14,
    boundary: str = "symmetric",
) -> Decomposition:
    """Additive multiresolution decomposition into ``levels + 1`` components.

    Component ``j`` (1-based) is detail ``D<j>`` covering the nominal band
    ``(fs / 2**(j+1), fs / 2**j]``; the last component is the approximation.
    """
    x = signal.samples
    n = x.size
    _check_levels(n, levels, boundary)
    ext = _extend(x, boundary)
    spectrum = np.fft.rfft(ext)
    highs, low = _level_responses(bank, ext.size, levels)
    comps = []
    for j, hj in enumerate(highs, start=1):
        d = np.fft.irfft(np.abs(hj) ** 2 * spectrum, n=ext.size)[:n]
        comps.append(Component(d, detail(j)))
    a = np.fft.irfft(np.abs(low) ** 2 * spectrum, n=ext.size)[:n]
    comps.append(Component(a, approximation(levels)))
    return Decomposition(tuple(comps), DecompositionKind.WAVELET_MRA, signal.fs, n)


def nominal_band(level: int, fs: float) -> tuple[float, float]:
    """Nominal (low, high] frequency band of detail ``level``."""
    return fs / 2 ** (level + 1), fs / 2**level


def high_band_fraction(first_group: int) -> float:
    """Share of [0, fs/2] nominally covered by the first ``first_group`` details."""
    return 1.0 - 2.0 ** (-first_group)


def group_split(decomp: Decomposition, first_group_size: int) -> tuple[Signal, Signal]:
    """Sum the first ``first_group_size`` components and the rest separately."""
    count = len(decomp)
    if not 1 <= first_group_size < count:
        raise ValueError(f"group size must be in [1, {count - 1}], got {first_group_size}")
    comps = decomp.components
    n, fs = decomp.source_len, decomp.fs
    return (
        sum_components(comps[:first_group_size], n, fs),
        sum_components(comps[first_group_size:], n, fs),
    )


def soft_threshold(w: np.ndarray, t: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - t, 0.0)


def noise_sigma(finest: np.ndarray) -> float:
    """Median-absolute-deviation noise estimate from finest-scale coefficients."""
    return float(np.median(np.abs(finest)) / 0.6745)


def wavelet_denoise(
    signal: Signal,
    spec: DenoiseSpec,
    bank: FilterBank = FK14,
    boundary: str = "symmetric",
) -> Signal:
    """Translation-invariant wavelet shrinkage.

    Noise level is estimated from the finest undecimated wavelet
    coefficients and rescaled to the orthonormal convention, so the
    universal threshold ``sigma * sqrt(2 ln N)`` applies at level 1 and
    shrinks by ``2**(-j/2)`` with depth ``j``.  The approximation is left
    untouched.
    """
    x = signal.samples
    n = x.size
    _check_levels(n, spec.level, boundary)
    ext = _extend(x, boundary)
    m = ext.size
    spectrum = np.fft.rfft(ext)
    highs, low = _level_responses(bank, m, spec.level)

    coeffs = [np.fft.irfft(hj * spectrum, n=m) for hj in highs]
    # undecimated level-1 coefficients carry half the orthonormal noise variance
    sigma = SQRT2 * noise_sigma(coeffs[0][:n])
    base = spec.threshold_scale * sigma * np.sqrt(2.0 * np.log(n))

    out = np.conj(low) * low * spectrum
    for j, (hj, w) in enumerate(zip(highs, coeffs), start=1):
        t = base / 2 ** (j / 2)
        if t > 0:
            w = soft_threshold(w, t)
        out = out + np.conj(hj) * np.fft.rfft(w)
    return signal.with_samples(np.fft.irfft(out, n=m)[:n])
