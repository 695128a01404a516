"""Interval constructions: split conformal, EnbPI, SPCI, Global-CP, CV, Gaussian."""

from __future__ import annotations

import math

import numpy as np
import pytest

from ctsbench.conformal import (
    EnsembleSpec,
    IntervalMatrix,
    ResidualMatrix,
    SpciSpec,
    build_residual_matrix,
    conformal_quantile,
    cv_conformal_intervals,
    cv_residual_matrix,
    enbpi_intervals,
    enbpi_loo_residuals,
    global_cp_intervals,
    mscp_intervals,
    parametric_intervals,
    spci_intervals,
    spci_quantile_pair,
)
from ctsbench.forecaster import FittedForecaster, ForecasterSpec, fit_auto_ar, forecast, point_forecast, sigma_h
from ctsbench.series import SeriesPanel, SplitSpec, TimeSeries
from ctsbench.special import normal_quantile


def make_series(values, series_id="s", period=1):
    return TimeSeries(
        series_id=series_id,
        timestamps=np.arange(1, len(values) + 1, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        period=period,
    )


def simulate_ar1(n, phi, sigma=1.0, seed=0):
    rng = np.random.default_rng(seed)
    y = np.zeros(n + 1)
    for t in range(1, n + 1):
        y[t] = phi * y[t - 1] + sigma * rng.standard_normal()
    return y[1:]


def oracle_quantile(scores, level):
    arr = np.sort(np.asarray(scores, dtype=np.float64))
    k = math.ceil(level * (len(arr) + 1))
    if k > len(arr):
        return math.inf
    return float(arr[k - 1])


class TestConformalQuantile:
    def test_four_scores_median_level(self):
        assert conformal_quantile([1.0, 2.0, 3.0, 4.0], 0.5) == 3.0

    def test_small_sample_goes_infinite(self):
        assert conformal_quantile([1.0, 2.0], 0.9) == math.inf

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(2000):
            n = int(rng.integers(1, 60))
            scores = rng.standard_normal(n)
            level = float(rng.uniform(0.01, 0.99))
            assert conformal_quantile(scores, level) == oracle_quantile(scores, level)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            conformal_quantile([], 0.9)
        with pytest.raises(ValueError):
            conformal_quantile([1.0, np.inf], 0.9)
        with pytest.raises(ValueError):
            conformal_quantile([1.0], 1.0)


class TestResidualMatrix:
    def test_column_drops_padding(self):
        m = np.array([[1.0, 2.0], [3.0, np.nan]])
        rm = ResidualMatrix(matrix=m, origins=(5, 6))
        assert rm.column(1).tolist() == [1.0, 3.0]
        assert rm.column(2).tolist() == [2.0]

    def test_absolute_entries_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            ResidualMatrix(matrix=np.array([[-1.0]]), origins=(3,))
        ResidualMatrix(matrix=np.array([[-1.0]]), origins=(3,), signed=True)

    def test_build_constant_series_all_zero(self):
        ts = make_series(np.full(30, 5.0))
        rm = build_residual_matrix(ts, SplitSpec(20, 8, 2), ForecasterSpec(), 4)
        finite = rm.matrix[np.isfinite(rm.matrix)]
        assert np.allclose(finite, 0.0)

    def test_build_ragged_columns(self):
        ts = make_series(simulate_ar1(40, 0.5, seed=1))
        rm = build_residual_matrix(ts, SplitSpec(25, 10, 5), ForecasterSpec(), 6)
        assert rm.matrix.shape == (10, 6)
        # horizon h sees cal_len - h + 1 truths inside the calibration block
        for h in range(1, 7):
            assert len(rm.column(h)) == max(10 - h + 1, 0)

    def test_build_signed_matches_abs(self):
        ts = make_series(simulate_ar1(40, 0.5, seed=2))
        spec = SplitSpec(25, 10, 5)
        signed = build_residual_matrix(ts, spec, ForecasterSpec(), 3, signed=True)
        unsigned = build_residual_matrix(ts, spec, ForecasterSpec(), 3)
        assert np.allclose(
            np.abs(signed.matrix), unsigned.matrix, equal_nan=True
        )


class TestMscp:
    def test_hand_radius(self):
        rm = ResidualMatrix(
            matrix=np.array([[2.0], [4.0], [6.0]]), origins=(1, 2, 3)
        )
        iv = mscp_intervals(np.array([10.0]), rm, 0.5)
        assert iv.lower[0, 0] == 6.0 and iv.upper[0, 0] == 14.0

    def test_tiny_column_gives_infinite_band(self):
        rm = ResidualMatrix(matrix=np.array([[1.0], [2.0]]), origins=(1, 2))
        iv = mscp_intervals(np.array([0.0]), rm, 0.1)
        assert iv.lower[0, 0] == -math.inf and iv.upper[0, 0] == math.inf

    def test_empty_column_names_horizon(self):
        rm = ResidualMatrix(
            matrix=np.array([[1.0, np.nan], [2.0, np.nan]]), origins=(1, 2)
        )
        with pytest.raises(ValueError, match="horizon 2"):
            mscp_intervals(np.array([0.0, 0.0]), rm, 0.5)

    def test_signed_matrix_rejected(self):
        rm = ResidualMatrix(matrix=np.array([[1.0]]), origins=(1,), signed=True)
        with pytest.raises(ValueError, match="absolute"):
            mscp_intervals(np.array([0.0]), rm, 0.5)

    def test_pipeline_coverage_band(self):
        # 150 AR(1) series, alpha=0.1: empirical coverage near the target
        rng = np.random.default_rng(100)
        hits = cells = 0
        for _ in range(150):
            y = simulate_ar1(60, 0.6, seed=int(rng.integers(1 << 30)))
            ts = make_series(y)
            rm = build_residual_matrix(
                ts, SplitSpec(40, 15, 5), ForecasterSpec(), 5, refit_every=None
            )
            model = fit_auto_ar(y[:55], ForecasterSpec())
            iv = mscp_intervals(forecast(model, y[:55], 5), rm, 0.1)
            truth = y[55:]
            hits += int(np.sum((truth >= iv.lower[0]) & (truth <= iv.upper[0])))
            cells += 5
        assert 0.86 <= hits / cells <= 0.96


class TestEnbpi:
    def test_loo_hand_example(self):
        # order-0 members are constant predictors, so LOO means are explicit
        def const_model(c):
            return FittedForecaster(
                phi=np.empty(0), intercept=c, sigma2=1.0, order=0, n_train=3,
                aic=0.0, aics=(0.0,), candidate_orders=(0,),
            )

        members = [
            (frozenset({0, 1}), const_model(10.0)),
            (frozenset({1, 2}), const_model(20.0)),
        ]
        residuals, fallbacks = enbpi_loo_residuals(
            np.array([1.0, 2.0, 3.0]), members
        )
        # i=0: only member 2 excludes it -> |1-20|; i=1: nobody excludes it
        # -> fallback mean 15 -> |2-15|; i=2: member 1 -> |3-10|
        assert residuals.tolist() == [19.0, 13.0, 7.0]
        assert fallbacks == 1

    def test_interval_shape_and_determinism(self):
        y = simulate_ar1(80, 0.5, seed=11)
        ts = make_series(y)
        spec = EnsembleSpec(B=8, seed=3)
        a = enbpi_intervals(ts, 6, spec, ForecasterSpec(), 0.1)
        b = enbpi_intervals(ts, 6, spec, ForecasterSpec(), 0.1)
        assert a.shape == (1, 6)
        assert a == b
        assert "loo_fallbacks" in a.diagnostics and "loo_count" in a.diagnostics

    def test_different_seed_changes_members(self):
        y = simulate_ar1(80, 0.5, seed=11)
        ts = make_series(y)
        a = enbpi_intervals(ts, 6, EnsembleSpec(B=8, seed=3), ForecasterSpec(), 0.1)
        b = enbpi_intervals(ts, 6, EnsembleSpec(B=8, seed=4), ForecasterSpec(), 0.1)
        assert not np.allclose(a.lower, b.lower)

    def test_window_updates_with_realized_residuals(self):
        # a huge level shift in the test block must widen later intervals
        y = np.concatenate([simulate_ar1(70, 0.3, seed=5), np.full(10, 50.0)])
        ts = make_series(y)
        iv = enbpi_intervals(ts, 10, EnsembleSpec(B=8, seed=0, window_len=30), ForecasterSpec(), 0.1)
        w = iv.width[0]
        assert w[-1] > w[0]

    def test_too_short_series_rejected(self):
        with pytest.raises(ValueError):
            enbpi_intervals(make_series(np.arange(6.0)), 2, EnsembleSpec(B=4), ForecasterSpec(), 0.1)


class TestSpci:
    def test_history_too_short(self):
        with pytest.raises(ValueError, match="history too short"):
            spci_quantile_pair(np.zeros(10), SpciSpec(lag_count=8), 0.1)

    def test_constant_history_falls_back(self):
        q_lo, q_hi, beta, diag = spci_quantile_pair(
            np.full(30, 2.0), SpciSpec(lag_count=8), 0.1
        )
        assert diag["fallbacks"] == 1
        assert q_lo == pytest.approx(2.0) and q_hi == pytest.approx(2.0)

    def test_beta_in_grid(self):
        e = simulate_ar1(60, 0.8, seed=21)
        _, _, beta, _ = spci_quantile_pair(e, SpciSpec(), 0.1)
        assert beta in np.linspace(0.0, 0.1, 11)

    def test_narrower_than_split_on_autocorrelated_residuals(self):
        # quantile regression on lagged residuals exploits the dependence
        # that the marginal split-conformal quantile ignores
        rng = np.random.default_rng(42)
        spci_w, mscp_w = [], []
        for _ in range(40):
            e = np.zeros(60)
            for t in range(1, 60):
                e[t] = 0.8 * e[t - 1] + rng.standard_normal()
            q_lo, q_hi, _, _ = spci_quantile_pair(e, SpciSpec(), 0.1)
            spci_w.append(q_hi - q_lo)
            mscp_w.append(2.0 * conformal_quantile(np.abs(e), 0.9))
        assert np.mean(spci_w) < np.mean(mscp_w)

    def test_intervals_require_signed(self):
        rm = ResidualMatrix(matrix=np.abs(np.random.default_rng(0).standard_normal((30, 2))), origins=tuple(range(30)))
        with pytest.raises(ValueError, match="signed"):
            spci_intervals(np.zeros(2), rm, SpciSpec(), 0.1)

    def test_intervals_shape_and_diagnostics(self):
        rng = np.random.default_rng(9)
        m = rng.standard_normal((30, 3))
        rm = ResidualMatrix(matrix=m, origins=tuple(range(30)), signed=True)
        iv = spci_intervals(np.zeros(3), rm, SpciSpec(lag_count=4), 0.1)
        assert iv.shape == (1, 3)
        assert set(iv.diagnostics) == {"crossings", "fallbacks", "betas"}
        assert len(iv.diagnostics["betas"]) == 3


class TestGlobalCp:
    def test_single_series_rejected(self):
        panel = SeriesPanel((make_series(np.arange(30.0)),))
        with pytest.raises(ValueError, match="requires a cohort"):
            global_cp_intervals(panel, 0.5, ForecasterSpec(), 0.1, 3)

    def test_h1_equals_split_conformal(self):
        # with one horizon the pooled construction reduces to plain split
        # conformal over per-series holdout residuals
        rng = np.random.default_rng(14)
        series = tuple(
            make_series(simulate_ar1(40, 0.5, seed=int(rng.integers(1 << 30))), series_id=f"s{i:02d}")
            for i in range(8)
        )
        panel = SeriesPanel(series)
        res = global_cp_intervals(panel, 0.5, ForecasterSpec(), 0.1, 1)
        assert res.calibration_ids == panel.ids[:4]
        assert res.evaluation_ids == panel.ids[4:]
        pooled = []
        for sid in res.calibration_ids:
            y = panel[sid].values
            model = fit_auto_ar(y[:-1], ForecasterSpec())
            yhat = forecast(model, y[:-1], 1)
            pooled.append(abs(y[-1] - yhat[0]))
        radius = conformal_quantile(np.asarray(pooled), 0.9)
        assert res.radii[0] == radius
        for sid in res.evaluation_ids:
            y = panel[sid].values
            model = fit_auto_ar(y[:-1], ForecasterSpec())
            yhat = forecast(model, y[:-1], 1)
            iv = res.intervals[sid]
            assert iv.lower[0, 0] == yhat[0] - radius
            assert iv.upper[0, 0] == yhat[0] + radius

    def test_shared_radii_across_evaluation_series(self):
        rng = np.random.default_rng(15)
        series = tuple(
            make_series(simulate_ar1(48, 0.4, seed=int(rng.integers(1 << 30))), series_id=f"s{i:02d}")
            for i in range(10)
        )
        res = global_cp_intervals(SeriesPanel(series), 0.5, ForecasterSpec(), 0.1, 6)
        for sid in res.evaluation_ids:
            w = res.intervals[sid].width[0]
            assert np.allclose(w, 2.0 * res.radii)


class TestCvConformal:
    def test_empirical_median_of_three(self):
        assert float(np.quantile([2.0, 4.0, 6.0], 0.5)) == 4.0

    def test_radii_match_backtest_quantiles(self):
        y = simulate_ar1(60, 0.5, seed=30)
        ts = make_series(y)
        iv = cv_conformal_intervals(ts, 3, ForecasterSpec(), 0.1, 4)
        rm = cv_residual_matrix(ts, 3, ForecasterSpec(), 4)
        yhat = point_forecast(ts, ForecasterSpec(), 4)[0]
        for h in range(1, 5):
            radius = float(np.quantile(rm.column(h), 0.9))
            assert iv.lower[0, h - 1] == pytest.approx(yhat[h - 1] - radius)
            assert iv.upper[0, h - 1] == pytest.approx(yhat[h - 1] + radius)

    def test_single_window_matches_manual_holdout(self):
        y = simulate_ar1(40, 0.5, seed=31)
        ts = make_series(y)
        rm = cv_residual_matrix(ts, 1, ForecasterSpec(), 5)
        cutoff = 35
        yhat = point_forecast(ts.head(cutoff), ForecasterSpec(), 5)[0]
        expected = np.abs(y[cutoff:] - yhat)
        assert np.allclose(rm.matrix[0], expected)
        assert rm.origins == (cutoff,)

    def test_too_many_windows_rejected(self):
        ts = make_series(np.arange(10.0))
        with pytest.raises(ValueError, match="backtest"):
            cv_residual_matrix(ts, 3, ForecasterSpec(), 4)


class TestParametric:
    def test_width_is_two_z_sigma(self):
        y = simulate_ar1(50, 0.5, seed=40)
        model = fit_auto_ar(y, ForecasterSpec())
        iv = parametric_intervals(model, y, 6, 0.1)
        z = normal_quantile(0.95)
        assert np.allclose(iv.width[0], 2.0 * z * sigma_h(model, 6))

    def test_centered_on_forecast(self):
        y = simulate_ar1(50, 0.5, seed=41)
        model = fit_auto_ar(y, ForecasterSpec())
        iv = parametric_intervals(model, y, 4, 0.2)
        yhat = forecast(model, y, 4)
        assert np.allclose((iv.lower[0] + iv.upper[0]) / 2.0, yhat)


class TestIntervalMatrix:
    def test_crossed_bounds_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            IntervalMatrix(lower=np.array([[1.0]]), upper=np.array([[0.0]]))

    def test_width(self):
        iv = IntervalMatrix(lower=np.array([[0.0, 1.0]]), upper=np.array([[2.0, 4.0]]))
        assert iv.width.tolist() == [[2.0, 3.0]]
