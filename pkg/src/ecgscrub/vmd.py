"""Variational mode decomposition.

Alternating minimisation in the Fourier domain: each mode spectrum is a
Wiener-filtered residual centred on its current centre frequency, each
centre frequency is the power-weighted mean frequency of its mode, and the
Lagrange multiplier takes a dual-ascent step of size ``tau``.  Only the
non-negative half of the spectrum is updated, which is the same as
working with the analytic signal of every mode.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .signal import Component, Decomposition, DecompositionKind, Signal, mode


class VmdInit(str, Enum):
    UNIFORM = "uniform"
    ZERO = "zero"


@dataclass(frozen=True)
class VmdConfig:
    K: int = 10
    alpha: float = 2000.0
    tau: float = 0.0
    tol: float = 1e-7
    max_iter: int = 500
    init: VmdInit = VmdInit.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "init", VmdInit(self.init))
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class VmdResult:
    modes: Decomposition
    center_freqs: tuple[float, ...]
    iterations: int
    converged: bool


def vmd_decompose(signal: Signal, cfg: VmdConfig = VmdConfig()) -> VmdResult:
    x = signal.samples
    n = x.size
    K = cfg.K
    if K > n // 2:
        raise ValueError(f"over-parameterized: K={K} modes for {n} samples")

    # mirror half the signal onto each side; total length 2n
    half = n // 2
    ext = np.concatenate([x[:half][::-1], x, x[half:][::-1]])
    T = ext.size
    f_hat = np.fft.fft(ext)
    pos = slice(0, T // 2 + 1)
    f_plus = f_hat[pos].copy()
    w = np.arange(T // 2 + 1) / T  # cycles per sample, 0 .. 0.5

    if cfg.init is VmdInit.UNIFORM:
        omega = 0.5 * np.arange(K) / K
    else:
        omega = np.zeros(K)
    u_hat = np.zeros((K, w.size), dtype=complex)
    lam = np.zeros(w.size, dtype=complex)
    power_f = 2.0 * cfg.alpha

    converged = False
    it = 0
    total = u_hat.sum(axis=0)
    for it in range(1, cfg.max_iter + 1):
        prev = u_hat.copy()
        for k in range(K):
            others = total - u_hat[k]
            u_hat[k] = (f_plus - others + lam / 2) / (1.0 + power_f * (w - omega[k]) ** 2)
            total = others + u_hat[k]
            p = np.abs(u_hat[k]) ** 2
            ps = p.sum()
            if ps > 0:
                omega[k] = float(np.dot(w, p) / ps)
        lam = lam + cfg.tau * (f_plus - total)

        num = np.sum(np.abs(u_hat - prev) ** 2, axis=1)
        den = np.sum(np.abs(prev) ** 2, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
        if np.all(rel < cfg.tol):
            converged = True
            break

    modes = []
    start = half
    for k in range(K):
        full = np.zeros(T, dtype=complex)
        full[pos] = u_hat[k]
        # rebuild negative frequencies by Hermitian symmetry
        full[T // 2 + 1 :] = np.conj(u_hat[k][1 : T // 2][::-1])
        u = np.fft.ifft(full).real[start : start + n]
        fk = float(np.clip(omega[k], 0.0, 0.5)) * signal.fs
        modes.append(Component(u, mode(k + 1), fk))
    decomp = Decomposition(tuple(modes), DecompositionKind.VMD, signal.fs, n)
    return VmdResult(decomp, tuple(c.center_freq for c in modes), it, converged)


def sort_modes_by_freq(result: VmdResult, order: str = "descending") -> VmdResult:
    """Permute modes and centre frequencies together; ties keep their original order.

    Labels are renumbered so ``IMF1`` is the first mode in the new order.
    """
    if order not in ("descending", "ascending"):
        raise ValueError(f"unknown order {order!r}")
    freqs = np.array(result.center_freqs)
    key = -freqs if order == "descending" else freqs
    perm = np.argsort(key, kind="stable")
    comps = [result.modes.components[i] for i in perm]
    relabelled = tuple(Component(c.samples, mode(j + 1), c.center_freq) for j, c in enumerate(comps))
    modes = Decomposition(relabelled, DecompositionKind.VMD, result.modes.fs, result.modes.source_len)
    return replace(result, modes=modes, center_freqs=tuple(freqs[perm].tolist()))
