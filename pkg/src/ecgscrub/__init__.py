"""ECG denoising: decomposition, Gaussianity screening, wavelet shrinkage,
high-pass filtering and nonlocal means."""

from __future__ import annotations

__version__ = "0.1.0"

from .metrics import MetricReport, mse, prd, rmse, snr_db, snr_improvement
from .noise import awgn, mix_at_snr, synth_ecg
from .pipeline import Method, PipelineConfig, run, run_record
from .signal import Signal

__all__ = [
    "MetricReport", "Method", "PipelineConfig", "Signal", "awgn", "mix_at_snr", "mse",
    "prd", "rmse", "run", "run_record", "snr_db", "snr_improvement", "synth_ecg",
]
