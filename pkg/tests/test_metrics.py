from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgscrub.metrics import (
    CSV_COLUMNS,
    MetricReport,
    aggregate,
    mse,
    prd,
    rmse,
    snr_db,
    snr_improvement,
)
from ecgscrub.noise import awgn, mix_at_snr
from ecgscrub.signal import Signal


class TestPointMetrics:
    def test_mse_examples(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert mse([1.0, 2.0], [1.0, 3.0]) == 0.5
        x = np.array([0.3, -1.2, 4.0])
        assert mse(x, x + 0.25) == pytest.approx(0.0625, abs=1e-15)

    def test_prd_examples(self):
        assert prd([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert prd([1.0, 2.0], [1.0, 3.0]) == pytest.approx(100 * math.sqrt(1 / 5), abs=1e-12)
        x = np.array([0.3, -1.2, 4.0])
        assert prd(x, 2 * x) == pytest.approx(100.0, abs=1e-12)

    def test_rmse_is_sqrt_mse(self, rng):
        c, e = rng.standard_normal(50), rng.standard_normal(50)
        assert rmse(c, e) == math.sqrt(mse(c, e))

    def test_errors(self):
        with pytest.raises(ValueError):
            mse([1.0, 2.0], [1.0])
        with pytest.raises(ValueError):
            prd([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(ValueError, match="degenerate perfect estimate"):
            snr_db([1.0, 2.0], [1.0, 2.0])

    def test_accepts_signals(self):
        a, b = Signal([1.0, 2.0], 360), Signal([1.0, 3.0], 360)
        assert mse(a, b) == 0.5

    def test_prd_positive_iff_different(self, rng):
        x = rng.standard_normal(20)
        assert prd(x, x) == 0.0
        y = x.copy()
        y[7] += 1e-9
        assert prd(x, y) > 0.0


class TestSnr:
    def test_no_processing(self, rng):
        c = rng.standard_normal(100)
        n = c + rng.standard_normal(100)
        _, _, imp = snr_improvement(c, n, n)
        assert imp == 0.0

    def test_mixed_input(self, clean_ecg):
        noisy = mix_at_snr(clean_ecg, awgn(len(clean_ecg), 2), 7.5)
        snr_in, _, _ = snr_improvement(clean_ecg, noisy, clean_ecg.samples + 0.01)
        assert snr_in == pytest.approx(7.5, abs=1e-8)

    def test_halved_error(self, rng):
        c = rng.standard_normal(300)
        n = c + rng.standard_normal(300)
        _, _, imp = snr_improvement(c, n, c + (n - c) / 2)
        assert imp == pytest.approx(20 * math.log10(2), abs=1e-12)
        assert imp == pytest.approx(6.0206, abs=1e-4)

    def test_input_uses_noisy_output_uses_denoised(self, rng):
        c = rng.standard_normal(100)
        n = c + rng.standard_normal(100)
        d = c + 0.1 * rng.standard_normal(100)
        snr_in, snr_out, _ = snr_improvement(c, n, d)
        assert snr_in == pytest.approx(10 * math.log10(np.sum(c**2) / np.sum((n - c) ** 2)))
        assert snr_out == pytest.approx(10 * math.log10(np.sum(c**2) / np.sum((d - c) ** 2)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100).flatmap(lambda a: st.sampled_from([a, -a])))
    def test_scale_covariance(self, seed, a):
        r = np.random.default_rng(seed)
        c = r.standard_normal(64)
        n = c + r.standard_normal(64)
        d = c + 0.3 * r.standard_normal(64)
        base = MetricReport.compute(c, n, d)
        scaled = MetricReport.compute(a * c, a * n, a * d)
        for name in ("prd", "snr_in", "snr_out", "snr_imp"):
            assert getattr(scaled, name) == pytest.approx(getattr(base, name), abs=1e-10)
        assert scaled.mse == pytest.approx(a * a * base.mse, rel=1e-10)


class TestReport:
    def test_invariants(self, rng):
        c = rng.standard_normal(100)
        r = MetricReport.compute(c, c + rng.standard_normal(100), c + 0.2 * rng.standard_normal(100))
        assert r.rmse == pytest.approx(math.sqrt(r.mse), abs=1e-12)
        assert r.snr_imp == pytest.approx(r.snr_out - r.snr_in, abs=1e-12)
        assert list(r.to_dict()) == list(CSV_COLUMNS)
        assert r.as_row() == [r.mse, r.rmse, r.prd, r.snr_in, r.snr_out, r.snr_imp]

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            MetricReport(float("nan"), 0.0, 0.0, 0.0, 0.0, 0.0)

    def test_aggregate_mean_std_and_order_independent(self, rng):
        reports = []
        for _ in range(7):
            c = rng.standard_normal(50)
            reports.append(MetricReport.compute(c, c + rng.standard_normal(50), c + 0.1 * rng.standard_normal(50)))
        agg = aggregate(reports)
        table = np.array([r.as_row() for r in reports])
        np.testing.assert_allclose(agg.mean.as_row(), table.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(agg.std.as_row(), table.std(axis=0), rtol=1e-12)
        assert agg.count == 7
        shuffled = aggregate(reports[::-1])
        assert shuffled.mean == agg.mean and shuffled.std == agg.std

    def test_single_report(self, rng):
        c = rng.standard_normal(50)
        r = MetricReport.compute(c, c + 1.0, c + 0.5)
        agg = aggregate([r])
        assert agg.mean == r

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate([])
