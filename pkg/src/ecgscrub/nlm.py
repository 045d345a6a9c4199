"""Nonlocal-means smoothing of 1-D signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import Signal


@dataclass(frozen=True)
class NlmParams:
    """bandwidth: similarity scale in signal units; half-widths in samples."""

    bandwidth: float
    patch_half: int = 10
    search_half: int = 500

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.patch_half < 1:
            raise ValueError("patch_half must be >= 1")
        if self.search_half < self.patch_half:
            raise ValueError("search_half must be >= patch_half")

    @property
    def patch_size(self) -> int:
        return 2 * self.patch_half + 1


def difference_sigma(x) -> float:
    """Noise level from the median absolute first difference."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.median(np.abs(np.diff(x))) / (0.6745 * np.sqrt(2.0)))


def default_params(signal: Signal, scale: float = 0.6, patch_half: int = 10, search_half: int = 500) -> NlmParams:
    return NlmParams(scale * difference_sigma(signal.samples), patch_half, search_half)


def _patch_distance(x: np.ndarray, d: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean squared patch difference between every m and m + d.

    Entries where m + d falls outside the signal are NaN.  Patch offsets that
    leave the signal on either side are skipped and the mean is taken over
    the offsets that remain.
    """
    n = x.size
    lo, hi = max(0, -d), min(n, n - d)  # m with m + d inside the signal
    sq = np.zeros(n)
    valid = np.zeros(n)
    diff = x[lo:hi] - x[lo + d : hi + d]
    sq[lo:hi] = diff * diff  # explicit product: scalar ** goes through pow()
    valid[lo:hi] = 1.0
    total = np.zeros(n)
    count = np.zeros(n)
    for delta in range(-p, p + 1):
        # total[m] += sq[m + delta] wherever m + delta is in range
        if delta >= 0:
            total[: n - delta] += sq[delta:]
            count[: n - delta] += valid[delta:]
        else:
            total[-delta:] += sq[: n + delta]
            count[-delta:] += valid[: n + delta]
    dist = np.full(n, np.nan)
    dist[lo:hi] = total[lo:hi] / count[lo:hi]
    return dist, count


def _direct_distance(x: np.ndarray, m: int, d: int, p: int) -> float:
    n = x.size
    total = 0.0
    count = 0.0
    for delta in range(-p, p + 1):
        i, j = m + delta, m + d + delta
        if 0 <= i < n and 0 <= j < n:
            diff = x[i] - x[j]
            total += diff * diff
            count += 1.0
    return total / count


def nlm_weights(signal: Signal, params: NlmParams, method: str = "fast") -> np.ndarray:
    """Unnormalised weights, shape ``(len, 2 * search_half + 1)``.

    Column ``c`` holds ``w(m, m + c - search_half)``; pairs outside the
    signal are NaN.  ``method="direct"`` evaluates every pair with a scalar
    loop and is meant for checking the vectorised path.
    """
    x = signal.samples
    n = x.size
    s, p = params.search_half, params.patch_half
    h2 = 2.0 * params.bandwidth**2
    dist = np.full((n, 2 * s + 1), np.nan)
    for c, d in enumerate(range(-s, s + 1)):
        if method == "fast":
            dist[:, c] = _patch_distance(x, d, p)[0]
        elif method == "direct":
            for m in range(max(0, -d), min(n, n - d)):
                dist[m, c] = _direct_distance(x, m, d, p)
        else:
            raise ValueError(f"unknown method {method!r}")
    return np.exp(-dist / h2)


def nlm_denoise(signal: Signal, params: NlmParams) -> Signal:
    """Replace each sample by the similarity-weighted mean of its search window.

    The estimate is written as ``x[m] + sum w (x[n] - x[m]) / sum w``, which
    is algebraically the plain weighted mean but leaves constant stretches
    exactly unchanged.
    """
    x = signal.samples
    n = x.size
    if n <= params.patch_size:
        raise ValueError(f"signal too short: {n} samples for patch size {params.patch_size}")
    s, p = params.search_half, params.patch_half
    h2 = 2.0 * params.bandwidth**2
    num = np.zeros(n)
    den = np.zeros(n)
    for d in range(-s, s + 1):
        lo, hi = max(0, -d), min(n, n - d)
        if lo >= hi:
            continue
        dist, _ = _patch_distance(x, d, p)
        w = np.exp(-dist[lo:hi] / h2)
        num[lo:hi] += w * (x[lo + d : hi + d] - x[lo:hi])
        den[lo:hi] += w
    out = x + num / den
    return signal.with_samples(np.clip(out, x.min(), x.max()))
