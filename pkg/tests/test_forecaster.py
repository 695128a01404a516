"""Autoregressive fitting, AIC selection, multi-step variance, seasonal naive."""

from __future__ import annotations

import math

import numpy as np
import pytest

from ctsbench.forecaster import (
    FittedForecaster,
    ForecasterSpec,
    fit_auto_ar,
    forecast,
    point_forecast,
    seasonal_naive_forecast,
    sigma_h,
)
from ctsbench.series import TimeSeries


def simulate_ar1(n, phi, c=0.0, sigma=1.0, seed=0, burn=200):
    rng = np.random.default_rng(seed)
    y = 0.0
    out = np.empty(n + burn)
    for t in range(n + burn):
        y = c + phi * y + sigma * rng.standard_normal()
        out[t] = y
    return out[burn:]


class TestFitAutoAr:
    def test_constant_series_is_ar0_with_intercept(self):
        model = fit_auto_ar(np.full(20, 3.0), ForecasterSpec())
        assert model.order == 0
        assert model.intercept == pytest.approx(3.0)
        fc = forecast(model, np.full(20, 3.0), 5)
        assert np.allclose(fc, 3.0)

    def test_noise_free_ar1_recovery(self):
        # y_t = 2 + 0.7 y_{t-1}, started off the fixed point so the design
        # has variation; OLS recovers the recursion exactly
        y = np.empty(30)
        y[0] = 10.0
        for t in range(1, 30):
            y[t] = 2.0 + 0.7 * y[t - 1]
        model = fit_auto_ar(y, ForecasterSpec(max_order=3))
        assert model.order == 1
        assert model.phi[0] == pytest.approx(0.7, abs=1e-6)
        assert model.intercept == pytest.approx(2.0, abs=1e-5)
        fc = forecast(model, y, 3)
        expected = [2.0 + 0.7 * y[-1]]
        expected.append(2.0 + 0.7 * expected[0])
        expected.append(2.0 + 0.7 * expected[1])
        assert np.allclose(fc, expected, atol=1e-5)

    def test_matches_reference_ols_per_order(self):
        # the selected candidate must agree with a direct lstsq refit
        rng = np.random.default_rng(1)
        for _ in range(20):
            y = simulate_ar1(60, 0.6, c=1.0, seed=int(rng.integers(1 << 30)))
            model = fit_auto_ar(y, ForecasterSpec(max_order=4))
            p = model.order
            X = np.column_stack(
                [np.ones(len(y) - p)] + [y[p - j : len(y) - j] for j in range(1, p + 1)]
            )
            coef, _, _, _ = np.linalg.lstsq(X, y[p:], rcond=None)
            assert model.intercept == pytest.approx(coef[0], abs=1e-9)
            assert np.allclose(model.phi, coef[1:], atol=1e-9)

    def test_aic_formula(self):
        y = simulate_ar1(50, 0.5, seed=7)
        model = fit_auto_ar(y, ForecasterSpec(max_order=2))
        for p, aic in zip(model.candidate_orders, model.aics):
            X = np.column_stack(
                [np.ones(len(y) - p)] + [y[p - j : len(y) - j] for j in range(1, p + 1)]
            )
            coef, _, _, _ = np.linalg.lstsq(X, y[p:], rcond=None)
            resid = y[p:] - X @ coef
            m = len(resid)
            expected = m * math.log(max(float(resid @ resid), 1e-300) / m) + 2 * (p + 2)
            assert aic == pytest.approx(expected, abs=1e-9)
        assert model.aic == min(model.aics)

    def test_tie_breaks_to_smaller_order(self):
        y = simulate_ar1(40, 0.0, seed=3)
        model = fit_auto_ar(y, ForecasterSpec(max_order=5))
        better = [p for p, a in zip(model.candidate_orders, model.aics) if a < model.aic]
        assert not better
        same = [p for p, a in zip(model.candidate_orders, model.aics) if a == model.aic]
        assert model.order == min(same)

    def test_no_drift_zero_intercept(self):
        y = simulate_ar1(50, 0.5, seed=9)
        model = fit_auto_ar(y, ForecasterSpec(include_drift=False))
        assert model.intercept == 0.0

    def test_short_series_rejected(self):
        with pytest.raises(ValueError, match="at least 3"):
            fit_auto_ar(np.array([1.0, 2.0]), ForecasterSpec())

    def test_max_order_clipped_by_length(self):
        y = simulate_ar1(6, 0.3, seed=2)
        model = fit_auto_ar(y, ForecasterSpec(max_order=10))
        assert max(model.candidate_orders) <= 4


class TestSigmaH:
    def test_ar0_constant_sigma(self):
        model = FittedForecaster(
            phi=np.empty(0), intercept=0.0, sigma2=4.0, order=0, n_train=10,
            aic=0.0, aics=(0.0,), candidate_orders=(0,),
        )
        assert np.allclose(sigma_h(model, 5), 2.0)

    def test_ar1_closed_form(self):
        # var(h) = sigma2 * sum_{k<h} phi^{2k}
        model = FittedForecaster(
            phi=np.array([0.5]), intercept=0.0, sigma2=1.0, order=1, n_train=10,
            aic=0.0, aics=(0.0,), candidate_orders=(0, 1),
        )
        got = sigma_h(model, 4)
        expected = np.sqrt(np.cumsum(0.25 ** np.arange(4)))
        assert np.allclose(got, expected)

    def test_nondecreasing_on_stable_fits(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            y = simulate_ar1(80, float(rng.uniform(-0.9, 0.9)), seed=int(rng.integers(1 << 30)))
            model = fit_auto_ar(y, ForecasterSpec(max_order=3))
            roots = np.roots(np.r_[1.0, -model.phi]) if model.order else np.array([])
            if model.order and np.any(np.abs(roots) >= 1.0):
                continue
            s = sigma_h(model, 12)
            assert np.all(np.diff(s) >= -1e-12)


class TestSeasonalNaive:
    def test_h1_reaches_back_one_period(self):
        y = np.arange(24.0)
        fc = seasonal_naive_forecast(y, 1, period=12)
        assert fc[0] == y[-12]

    def test_h13_wraps_to_same_month(self):
        y = np.arange(24.0)
        fc = seasonal_naive_forecast(y, 13, period=12)
        assert fc[12] == y[-12]
        assert fc[0] == y[-12]

    def test_full_cycle_repeats(self):
        y = np.arange(24.0)
        fc = seasonal_naive_forecast(y, 12, period=12)
        assert np.array_equal(fc, y[-12:])

    def test_short_history_rejected(self):
        with pytest.raises(ValueError, match="full period"):
            seasonal_naive_forecast(np.arange(5.0), 3, period=12)

    def test_series_period_used(self):
        ts = TimeSeries(
            series_id="s",
            timestamps=np.arange(1, 25, dtype=np.int64),
            values=np.arange(24.0),
            period=12,
        )
        fc, model = point_forecast(ts, ForecasterSpec(kind="seasonal_naive"), 3)
        assert model is None
        assert fc[0] == ts.values[-12]


class TestPointForecast:
    def test_auto_ar_returns_model(self):
        ts = TimeSeries(
            series_id="s",
            timestamps=np.arange(1, 41, dtype=np.int64),
            values=simulate_ar1(40, 0.6, seed=5),
            period=1,
        )
        fc, model = point_forecast(ts, ForecasterSpec(), 6)
        assert model is not None
        assert fc.shape == (6,)
        assert np.all(np.isfinite(fc))
