"""Point forecasters: AIC-selected autoregression and seasonal naive.

The AR forecaster fits each candidate order by least squares and keeps the
order with the smallest AIC. It plays the role usually delegated to a full
auto-ARIMA search; the conformal layer only consumes its point forecasts
(and, for the Gaussian baseline, its innovation variance), so any forecaster
with the same interface can be swapped in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import TimeSeries


@dataclass(frozen=True)
class ForecasterSpec:
    """Configuration for fitting a point forecaster.

    kind is "auto_ar" (AIC selection over AR orders 0..max_order, with an
    intercept when include_drift is set) or "seasonal_naive".
    """

    kind: str = "auto_ar"
    max_order: int = 5
    include_drift: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("auto_ar", "seasonal_naive"):
            raise ValueError(f"unknown forecaster kind {self.kind!r}")
        if self.max_order < 0:
            raise ValueError(f"max_order must be >= 0, got {self.max_order}")


@dataclass(frozen=True)
class FittedForecaster:
    """A fitted autoregression: values[t] ~ intercept + phi . values[t-1:t-p-1:-1]."""

    phi: np.ndarray
    intercept: float
    sigma2: float
    order: int
    n_train: int
    aic: float
    aics: tuple[float, ...]
    candidate_orders: tuple[int, ...]

    def __post_init__(self) -> None:
        phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)


def _ar_design(values: np.ndarray, p: int, intercept: bool) -> tuple[np.ndarray, np.ndarray]:
    n = len(values)
    m = n - p
    cols = []
    if intercept:
        cols.append(np.ones(m))
    for j in range(1, p + 1):
        cols.append(values[p - j : n - j])
    X = np.column_stack(cols) if cols else np.empty((m, 0))
    return X, values[p:]


def fit_auto_ar(train: np.ndarray | TimeSeries, spec: ForecasterSpec) -> FittedForecaster:
    """Fit AR(p) for each p in 0..max_order by OLS and select by AIC.

    AIC = m*ln(RSS/m) + 2*(p + 2) with m the number of regression rows;
    ties break toward the smaller order. sigma2 is RSS/(m - p - 1), floored
    at zero. Candidates whose design matrix is rank-deficient get +inf AIC;
    if every candidate degenerates the fallback is order 0 with the sample
    variance.
    """
    values = train.values if isinstance(train, TimeSeries) else np.asarray(train, dtype=np.float64)
    n = len(values)
    if n < 3:
        raise ValueError(f"auto_ar needs at least 3 observations, have {n}")
    max_p = min(spec.max_order, n - 2)
    candidates: list[tuple[float, int, np.ndarray, float, float]] = []
    aics = []
    for p in range(max_p + 1):
        X, y = _ar_design(values, p, spec.include_drift)
        m = len(y)
        n_params = X.shape[1]
        if m <= n_params:
            aics.append(math.inf)
            continue
        coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if n_params and rank < n_params:
            aics.append(math.inf)
            continue
        resid = y - X @ coef
        rss = float(resid @ resid)
        aic = m * math.log(max(rss, 1e-300) / m) + 2.0 * (p + 2)
        aics.append(aic)
        dof = max(m - p - 1, 1)
        sigma2 = max(rss / dof, 0.0)
        if spec.include_drift:
            c, phi = float(coef[0]), coef[1:]
        else:
            c, phi = 0.0, coef
        candidates.append((aic, p, phi, c, sigma2))
    if not candidates:
        mean = float(np.mean(values))
        sigma2 = float(np.var(values))
        return FittedForecaster(
            phi=np.empty(0), intercept=mean, sigma2=sigma2, order=0,
            n_train=n, aic=math.inf, aics=tuple(aics),
            candidate_orders=tuple(range(max_p + 1)),
        )
    best = min(candidates, key=lambda cand: (cand[0], cand[1]))
    aic, p, phi, c, sigma2 = best
    return FittedForecaster(
        phi=phi, intercept=c, sigma2=sigma2, order=p, n_train=n, aic=aic,
        aics=tuple(aics), candidate_orders=tuple(range(max_p + 1)),
    )


def forecast(model: FittedForecaster, history: np.ndarray | TimeSeries, horizon: int) -> np.ndarray:
    """Recursive multi-step point forecasts from the end of history."""
    values = history.values if isinstance(history, TimeSeries) else np.asarray(history, dtype=np.float64)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    p = model.order
    if len(values) < p:
        raise ValueError(f"history shorter than AR order: {len(values)} < {p}")
    buf = list(values[len(values) - p :]) if p else []
    out = np.empty(horizon)
    for h in range(horizon):
        yhat = model.intercept
        for j in range(p):
            yhat += model.phi[j] * buf[-1 - j]
        out[h] = yhat
        if p:
            buf.append(yhat)
    return out


def sigma_h(model: FittedForecaster, horizon: int) -> np.ndarray:
    """Forecast standard deviations by the psi-weight recursion.

    psi_0 = 1, psi_k = sum_{j=1}^{min(k,p)} phi_j psi_{k-j};
    var(h) = sigma2 * sum_{k<h} psi_k^2.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    p = model.order
    psi = np.empty(horizon)
    psi[0] = 1.0
    for k in range(1, horizon):
        acc = 0.0
        for j in range(1, min(k, p) + 1):
            acc += model.phi[j - 1] * psi[k - j]
        psi[k] = acc
    return np.sqrt(model.sigma2 * np.cumsum(psi * psi))


def seasonal_naive_forecast(history: np.ndarray | TimeSeries, horizon: int, period: int | None = None) -> np.ndarray:
    """Repeat the last full seasonal cycle: yhat_{T+h} = y_{T+h-m*ceil(h/m)}."""
    if isinstance(history, TimeSeries):
        values = history.values
        m = history.period if period is None else period
    else:
        values = np.asarray(history, dtype=np.float64)
        if period is None:
            raise ValueError("period required when history is a bare array")
        m = period
    if m < 1:
        raise ValueError(f"period must be >= 1, got {m}")
    n = len(values)
    if n < m:
        raise ValueError(f"seasonal naive needs at least one full period: {n} < {m}")
    out = np.empty(horizon)
    for h in range(1, horizon + 1):
        idx = n + h - m * math.ceil(h / m) - 1
        out[h - 1] = values[idx]
    return out


def point_forecast(
    history: TimeSeries, spec: ForecasterSpec, horizon: int
) -> tuple[np.ndarray, FittedForecaster | None]:
    """Fit per spec on the history and forecast; seasonal naive has no model."""
    if spec.kind == "seasonal_naive":
        return seasonal_naive_forecast(history, horizon), None
    model = fit_auto_ar(history, spec)
    return forecast(model, history, horizon), model
