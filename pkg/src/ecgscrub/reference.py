"""Published benchmark figures used as read-only comparison columns.

Values are stored exactly as published, including their unit scaling
(``MSE_x1e-4`` means the number is MSE times 1e4).  They are never
recomputed.  Keys are ``(record, noise, snr_db)``.
"""

from __future__ import annotations

# AWGN at 10 dB input SNR, MIT-BIH records 100/103/105.
_AWGN_METHODS = ("WLNH", "VLWNH", "VMD-NLM", "EMD-Wavelet", "NLM-MEMD", "NLM-DWT")
_AWGN = {
    "100": {"MSE_x1e-4": (2.3, 2.5, 3.0, 9, 8.0, 3.9),
            "PRD": (4.67, 4.37, 5.28, 9.23, 8.11, 5.5),
            "SNRimp": (26.59, 26.12, 8.92, 7.34, 5.21, 8.58)},
    "103": {"MSE_x1e-4": (1.8, 1.8, 8.0, 25, 1.7, 8.9),
            "PRD": (5.02, 5.04, 7.63, 13.43, 10.89, 7.75),
            "SNRimp": (27.29, 27.4, 8.56, 7.64, 7.54, 8.58)},
    "105": {"MSE_x1e-4": (7.2, 7.1, 18.0, 22, 20.0, 11.0),
            "PRD": (5.76, 6.18, 8.69, 8.87, 12.05, 8.87),
            "SNRimp": (22.57, 22.64, 8.3, 8.16, 5.51, 8.16)},
}

# Baseline wander from the noise stress test database, 0 and 5 dB.
_BW_METHODS = ("WLNH", "VLWNH", "GAN", "stacked DAE", "Improved DAE", "WT")
_BW = {
    ("103", 0): {"RMSE_x1e-3": (6, 5.9, 3.2, 38, 26, 74),
                 "PRD": (1.31, 1.39, 0.97, 9.75, 6.47, 18.05),
                 "SNRimp": (37.41, 37.31, 40.26, 20.38, 23.78, 14.87)},
    ("103", 5): {"RMSE_x1e-3": (4.5, 4.4, 2.7, 37, 25, 74),
                 "PRD": (1.13, 1.09, 0.83, 9.15, 6.39, 17.99),
                 "SNRimp": (37.75, 37.89, 41.60, 15.77, 18.89, 9.9)},
    ("105", 0): {"RMSE_x1e-3": (12.6, 1.33, 3.5, 29, 28, 14),
                 "PRD": (2.3, 2.42, 1.06, 5.69, 5.37, 2.65),
                 "SNRimp": (32.1, 31.44, 39.49, 24.9, 25.4, 31.53)},
    ("105", 5): {"RMSE_x1e-3": (9.5, 9.6, 3.4, 27, 27, 12),
                 "PRD": (1.5768, 1.51, 0.094, 5.33, 5.34, 2.31),
                 "SNRimp": (32.77, 32.49, 40.56, 20.47, 20.45, 27.71)},
}

# Muscle artefact from the noise stress test database, 0 and 5 dB.
_MA_METHODS = ("WLNH", "GAN", "stacked DAE", "DAE", "WT")
_MA = {
    ("103", 0): {"RMSE": (0.022, 0.004, 0.046, 0.034, 0.044),
                 "PRD": (6.36, 0.86, 11.32, 8.53, 10.4),
                 "SNRimp": (25.77, 41.36, 18.92, 21.38, 19.66)},
    ("103", 5): {"RMSE": (0.016, 0.003, 0.044, 0.027, 0.067),
                 "PRD": (3.98, 0.69, 10.83, 6.82, 16.24),
                 "SNRimp": (27.16, 38.24, 14.31, 18.33, 10.79)},
    ("105", 0): {"RMSE": (0.0436, 0.007, 0.036, 0.03, 0.04),
                 "PRD": (8.84, 1.5, 7.1, 5.81, 7.86),
                 "SNRimp": (21.6219, 36.49, 22.97, 24.72, 22.09)},
    ("105", 5): {"RMSE": (0.031, 0.005, 0.032, 0.028, 0.032),
                 "PRD": (7.4772, 1.05, 6.22, 5.54, 6.23),
                 "SNRimp": (22.3689, 34.55, 19.12, 20.13, 19.11)},
}


def _expand(methods, measures: dict) -> dict[str, dict[str, float]]:
    return {m: {k: float(v[i]) for k, v in measures.items()} for i, m in enumerate(methods)}


REFERENCE: dict[tuple[str, str, float], dict[str, dict[str, float]]] = {}
for _rec, _meas in _AWGN.items():
    REFERENCE[(_rec, "awgn", 10.0)] = _expand(_AWGN_METHODS, _meas)
for (_rec, _snr), _meas in _BW.items():
    REFERENCE[(_rec, "bw", float(_snr))] = _expand(_BW_METHODS, _meas)
for (_rec, _snr), _meas in _MA.items():
    REFERENCE[(_rec, "ma", float(_snr))] = _expand(_MA_METHODS, _meas)

# Strongest competing (non-proposed) SNR improvement in the AWGN grid.
BEST_AWGN_BASELINE_SNR_IMP = max(
    v["SNRimp"] for key, rows in REFERENCE.items() if key[1] == "awgn"
    for m, v in rows.items() if m not in ("WLNH", "VLWNH")
)


def lookup(record: str, noise: str, snr_db: float) -> dict[str, dict[str, float]]:
    """Published rows for a benchmark cell; empty if that cell was not reported."""
    return REFERENCE.get((str(record), noise.lower(), float(snr_db)), {})


def flat_columns(record: str, noise: str, snr_db: float) -> dict[str, float]:
    """``{"ref_<method>_<measure>": value}`` for embedding in bench CSVs."""
    out = {}
    for method, measures in lookup(record, noise, snr_db).items():
        for measure, v in measures.items():
            out[f"ref_{method.replace(' ', '_')}_{measure}"] = v
    return out
