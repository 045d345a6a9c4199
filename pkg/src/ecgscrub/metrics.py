"""Denoising quality metrics.

SNR_in is measured on the noisy input and SNR_out on the denoised output;
their difference is the improvement.  Aggregation over segments is the
plain mean of per-segment values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable

import numpy as np

from .signal import as_array

CSV_COLUMNS = ("mse", "rmse", "prd", "snr_in", "snr_out", "snr_imp")


def _pair(clean, estimate) -> tuple[np.ndarray, np.ndarray]:
    x, y = as_array(clean), as_array(estimate)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    return x, y


def mse(clean, estimate) -> float:
    x, y = _pair(clean, estimate)
    return float(np.mean((x - y) ** 2))


def rmse(clean, estimate) -> float:
    return math.sqrt(mse(clean, estimate))


def prd(clean, estimate) -> float:
    """Percentage root-mean-square difference."""
    x, y = _pair(clean, estimate)
    energy = float(np.sum(x**2))
    if energy == 0.0:
        raise ValueError("clean signal has zero energy")
    return 100.0 * math.sqrt(float(np.sum((y - x) ** 2)) / energy)


def snr_db(clean, estimate) -> float:
    x, y = _pair(clean, estimate)
    err = float(np.sum((y - x) ** 2))
    if err == 0.0:
        raise ValueError("degenerate perfect estimate: error energy is zero")
    return 10.0 * math.log10(float(np.sum(x**2)) / err)


def snr_improvement(clean, noisy, denoised) -> tuple[float, float, float]:
    """Return ``(snr_in, snr_out, snr_imp)`` in dB."""
    snr_in = snr_db(clean, noisy)
    snr_out = snr_db(clean, denoised)
    return snr_in, snr_out, snr_out - snr_in


@dataclass(frozen=True)
class MetricReport:
    mse: float
    rmse: float
    prd: float
    snr_in: float
    snr_out: float
    snr_imp: float

    def __post_init__(self):
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"{f.name} is not finite")

    @classmethod
    def compute(cls, clean, noisy, denoised) -> "MetricReport":
        m = mse(clean, denoised)
        snr_in, snr_out, snr_imp = snr_improvement(clean, noisy, denoised)
        return cls(m, math.sqrt(m), prd(clean, denoised), snr_in, snr_out, snr_imp)

    def as_row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AggregateReport:
    """Mean and standard deviation of per-segment reports."""

    mean: MetricReport
    std: MetricReport
    count: int


def aggregate(reports: Iterable[MetricReport]) -> AggregateReport:
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    table = np.array([r.as_row() for r in reports])
    # sort rows so the result does not depend on completion order
    table = table[np.lexsort(table.T[::-1])]
    mean = MetricReport(*table.mean(axis=0))
    std = MetricReport(*table.std(axis=0))
    return AggregateReport(mean, std, len(reports))
