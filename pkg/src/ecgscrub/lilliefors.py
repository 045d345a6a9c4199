"""Lilliefors test for normality with mean and variance estimated from the sample.

Critical values come from a seeded Monte Carlo simulation of the null
distribution of the statistic on a grid of sample sizes.  The shipped table
lives in ``ecgscrub/data``; when it is absent the table is simulated on
first use and cached under ``$ECGSCRUB_CACHE_DIR`` (default
``~/.cache/ecgscrub``).  Run ``python -m ecgscrub.lilliefors`` to rebuild
the shipped table.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

logger = logging.getLogger(__name__)

SUPPORTED_ALPHAS = (0.20, 0.15, 0.10, 0.05, 0.01)
CALIBRATION_SEED = 19670601
CALIBRATION_REPLICATES = 100_000
SIZE_GRID = tuple(range(4, 21)) + (
    25, 30, 40, 50, 64, 80, 100, 128, 160, 200, 256, 320, 400, 512,
    640, 800, 1024, 1280, 1600, 2048, 2560, 3200, 4096,
)
TABLE_NAME = "lilliefors_critical.csv"
_PACKAGED = Path(__file__).parent / "data" / TABLE_NAME

_lock = threading.Lock()
_table: dict[float, tuple[np.ndarray, np.ndarray]] | None = None


@dataclass(frozen=True)
class LillieforsResult:
    statistic: float
    critical_value: float
    alpha: float
    n: int
    is_gaussian: bool


def statistic(samples) -> float:
    """Largest gap between the empirical CDF and the fitted normal CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n < 4:
        raise ValueError(f"sample too small: n={n} < 4")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise ValueError("degenerate sample: zero variance")
    cdf = ndtr((x - x.mean()) / sd)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def _null_statistics(n: int, replicates: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(replicates)
    chunk = max(1, 4_000_000 // n)
    i = np.arange(1, n + 1)
    for start in range(0, replicates, chunk):
        rows = min(chunk, replicates - start)
        x = rng.standard_normal((rows, n))
        x.sort(axis=1)
        z = (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, ddof=1, keepdims=True)
        cdf = ndtr(z)
        d_plus = np.max(i / n - cdf, axis=1)
        d_minus = np.max(cdf - (i - 1) / n, axis=1)
        out[start : start + rows] = np.maximum(d_plus, d_minus)
    return out


def simulate_table(
    sizes=SIZE_GRID,
    alphas=SUPPORTED_ALPHAS,
    replicates: int = CALIBRATION_REPLICATES,
    seed: int = CALIBRATION_SEED,
) -> dict[float, tuple[np.ndarray, np.ndarray]]:
    """Null-distribution quantiles: ``{alpha: (sizes, critical values)}``."""
    sizes = np.array(sorted(sizes))
    crit = np.empty((len(alphas), sizes.size))
    for j, n in enumerate(sizes):
        # one stream per n so a grid change does not move other entries
        rng = np.random.default_rng([seed, int(n)])
        d = _null_statistics(int(n), replicates, rng)
        crit[:, j] = np.quantile(d, [1 - a for a in alphas])
        logger.debug("calibrated n=%d", n)
    # Monte Carlo noise must not break the decrease in n
    crit = np.minimum.accumulate(crit, axis=1)
    return {a: (sizes.astype(float), crit[k]) for k, a in enumerate(alphas)}


def write_table(table, path: Path, seed: int, replicates: int) -> None:
    """Write atomically: concurrent readers see the old file or the new one."""
    buf = io.StringIO()
    buf.write(f"# lilliefors null calibration seed={seed} replicates={replicates} rng=PCG64\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "alpha", "critical_value"])
    for alpha, (sizes, values) in sorted(table.items()):
        for n, v in zip(sizes, values):
            w.writerow([int(n), alpha, repr(float(v))])
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def read_table(path: Path) -> dict[float, tuple[np.ndarray, np.ndarray]]:
    rows: dict[float, list[tuple[float, float]]] = {}
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        rows.setdefault(float(rec["alpha"]), []).append((float(rec["n"]), float(rec["critical_value"])))
    table = {}
    for alpha, pairs in rows.items():
        pairs.sort()
        table[alpha] = (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))
    return table


def _cache_path() -> Path:
    root = os.environ.get("ECGSCRUB_CACHE_DIR") or Path.home() / ".cache" / "ecgscrub"
    return Path(root) / TABLE_NAME


def load_table() -> dict[float, tuple[np.ndarray, np.ndarray]]:
    global _table
    with _lock:
        if _table is None:
            for path in (_PACKAGED, _cache_path()):
                if path.exists():
                    _table = read_table(path)
                    break
            else:
                logger.warning("no Lilliefors table found; simulating (this takes a few minutes)")
                _table = simulate_table()
                write_table(_table, _cache_path(), CALIBRATION_SEED, CALIBRATION_REPLICATES)
        return _table


def _match_alpha(alpha: float) -> float:
    for a in SUPPORTED_ALPHAS:
        if abs(a - alpha) < 1e-12:
            return a
    raise ValueError(f"unsupported significance level {alpha}; supported: {SUPPORTED_ALPHAS}")


def critical_value(alpha: float, n: int) -> float:
    """Upper-``alpha`` critical value of the statistic for sample size ``n``.

    Log-log interpolation between grid sizes; beyond the grid the value is
    extended with the asymptotic ``1/sqrt(n)`` decay.
    """
    if n < 4:
        raise ValueError(f"sample too small: n={n} < 4")
    sizes, values = load_table()[_match_alpha(alpha)]
    if n >= sizes[-1]:
        return float(values[-1] * np.sqrt(sizes[-1] / n))
    return float(np.exp(np.interp(np.log(n), np.log(sizes), np.log(values))))


def lilliefors_test(samples, alpha: float = 0.05) -> LillieforsResult:
    x = np.asarray(samples, dtype=np.float64).ravel()
    d = statistic(x)
    cv = critical_value(alpha, x.size)
    return LillieforsResult(d, cv, alpha, x.size, bool(d <= cv))


def main() -> None:
    logging.basicConfig(level=logging.DEBUG, format="%(message)s")
    table = simulate_table()
    write_table(table, _PACKAGED, CALIBRATION_SEED, CALIBRATION_REPLICATES)
    print(f"wrote {_PACKAGED}")


if __name__ == "__main__":
    main()
