"""Batch conformal interval constructions for multi-horizon forecasts.

Implements the finite-sample conformal quantile, per-horizon calibrated
intervals (split conformal on a residual matrix), bootstrap-ensemble
intervals with a sliding residual window (Xu & Xie's EnbPI scheme),
sequential quantile-regression intervals on signed residuals (Xu & Xie's
SPCI scheme, with a linear pinball fit standing in for the quantile
forest), cross-series pooled intervals with a Bonferroni budget, a
cross-validation residual baseline, and Gaussian intervals from a fitted
autoregression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .forecaster import (
    FittedForecaster,
    ForecasterSpec,
    fit_auto_ar,
    forecast,
    point_forecast,
    sigma_h,
)
from .quantreg import fit_pinball_linear
from .series import SeriesPanel, SplitSpec, TimeSeries
from .special import normal_quantile


def conformal_quantile(scores: Sequence[float] | np.ndarray, level: float) -> float:
    """Finite-sample-corrected quantile of a score sample.

    Returns the k-th smallest score with k = ceil(level * (n+1)), or +inf
    when k exceeds n (the sample is too small to certify the level).
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    n = len(arr)
    if n == 0:
        raise ValueError("conformal_quantile requires a nonempty score sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError("conformal_quantile requires finite scores")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    k = math.ceil(level * (n + 1))
    if k > n:
        return math.inf
    return float(np.partition(arr, k - 1)[k - 1])


@dataclass(frozen=True, eq=False)
class ResidualMatrix:
    """Residuals by forecast origin (rows) and horizon (columns).

    Ragged late horizons are NaN-padded; column(h) drops the padding.
    Entries are absolute scores unless signed is set.
    """

    matrix: np.ndarray
    origins: tuple[int, ...]
    signed: bool = False

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ValueError("residual matrix must be 2-D with at least one row")
        if len(self.origins) != m.shape[0]:
            raise ValueError("one origin per matrix row required")
        if not self.signed:
            finite = m[np.isfinite(m)]
            if np.any(finite < 0.0):
                raise ValueError("absolute-score matrix entries must be nonnegative")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "origins", tuple(int(t) for t in self.origins))

    @property
    def horizons(self) -> int:
        return self.matrix.shape[1]

    def column(self, h: int) -> np.ndarray:
        """Finite residuals for horizon h (1-based)."""
        if not 1 <= h <= self.horizons:
            raise ValueError(f"horizon {h} outside 1..{self.horizons}")
        col = self.matrix[:, h - 1]
        return col[np.isfinite(col)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidualMatrix):
            return NotImplemented
        return (
            self.signed == other.signed
            and self.origins == other.origins
            and np.array_equal(self.matrix, other.matrix, equal_nan=True)
        )


@dataclass(frozen=True, eq=False)
class IntervalMatrix:
    """Lower/upper interval bounds per origin and horizon.

    Infinite bounds are permitted; lower <= upper wherever both are finite.
    diagnostics carries method-specific counters and never participates in
    equality.
    """

    lower: np.ndarray
    upper: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        lo = np.ascontiguousarray(np.atleast_2d(self.lower), dtype=np.float64)
        hi = np.ascontiguousarray(np.atleast_2d(self.upper), dtype=np.float64)
        if lo.shape != hi.shape:
            raise ValueError(f"bound shape mismatch: {lo.shape} vs {hi.shape}")
        both = np.isfinite(lo) & np.isfinite(hi)
        if np.any(lo[both] > hi[both]):
            raise ValueError("lower bound exceeds upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.lower.shape

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalMatrix):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(
            self.upper, other.upper
        )


def build_residual_matrix(
    series: TimeSeries,
    spec: SplitSpec,
    forecaster: ForecasterSpec,
    horizon: int,
    refit_every: int | None = 1,
    signed: bool = False,
) -> ResidualMatrix:
    """Rolling-origin residuals over the calibration segment.

    Origins run through the calibration block (one per calibration point);
    at each origin the forecaster sees all data up to the origin and
    forecasts `horizon` steps. A residual is recorded only for horizons
    whose truth falls inside the calibration block, so late columns are
    shorter. refit_every controls how often the model is refitted along
    the origins (None: fit once at the first origin); forecasts always use
    the full visible history.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if refit_every is not None and refit_every < 1:
        raise ValueError(f"refit_every must be >= 1 or None, got {refit_every}")
    n = len(series)
    if n < spec.total:
        raise ValueError(
            f"series {series.series_id!r} too short to split: need {spec.total}, have {n}"
        )
    start = n - spec.total
    work = series.values[start : start + spec.train_len + spec.cal_len]
    end = len(work)
    first = spec.train_len
    origins = list(range(first, end))
    if not origins:
        raise ValueError("no usable forecast origins in the calibration segment")
    rows = np.full((len(origins), horizon), np.nan)
    model: FittedForecaster | None = None
    for r, t in enumerate(origins):
        visible = work[:t]
        if forecaster.kind == "auto_ar":
            if model is None or (refit_every is not None and (t - first) % refit_every == 0):
                model = fit_auto_ar(visible, forecaster)
            yhat = forecast(model, visible, horizon)
        else:
            yhat = point_forecast(series.head(start + t), forecaster, horizon)[0]
        avail = min(horizon, end - t)
        truth = work[t : t + avail]
        resid = truth - yhat[:avail]
        rows[r, :avail] = resid if signed else np.abs(resid)
    return ResidualMatrix(matrix=rows, origins=tuple(origins), signed=signed)


def mscp_intervals(
    forecasts: np.ndarray, residuals: ResidualMatrix, alpha: float
) -> IntervalMatrix:
    """Symmetric per-horizon intervals from calibrated residual quantiles."""
    fc = np.atleast_2d(np.asarray(forecasts, dtype=np.float64))
    horizon = fc.shape[1]
    if residuals.signed:
        raise ValueError("mscp_intervals requires absolute scores")
    if horizon > residuals.horizons:
        raise ValueError(
            f"forecast horizon {horizon} exceeds residual horizons {residuals.horizons}"
        )
    radii = np.empty(horizon)
    for h in range(1, horizon + 1):
        col = residuals.column(h)
        if len(col) == 0:
            raise ValueError(f"residual column for horizon {h} is empty")
        radii[h - 1] = conformal_quantile(col, 1.0 - alpha)
    return IntervalMatrix(lower=fc - radii, upper=fc + radii)


@dataclass(frozen=True)
class EnsembleSpec:
    """Bootstrap ensemble configuration for EnbPI."""

    B: int = 20
    aggregation: str = "mean"
    window_len: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.B < 2:
            raise ValueError(f"B must be >= 2, got {self.B}")
        if self.aggregation != "mean":
            raise ValueError(f"unsupported aggregation {self.aggregation!r}")
        if self.window_len < 1:
            raise ValueError(f"window_len must be >= 1, got {self.window_len}")


def _one_step_prediction(model: FittedForecaster, history: np.ndarray) -> float:
    yhat = model.intercept
    for j in range(model.order):
        yhat += model.phi[j] * history[len(history) - 1 - j]
    return float(yhat)


def enbpi_loo_residuals(
    values: np.ndarray, members: Sequence[tuple[frozenset, FittedForecaster]]
) -> tuple[np.ndarray, int]:
    """Leave-one-out residuals on the training span.

    For each index i, the aggregate prediction averages the one-step fitted
    values of members whose bootstrap index set excludes i; when every
    member saw i, all members are used instead (counted as fallbacks).
    Indices below every member's AR order are skipped.
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    fitted = np.full((len(members), n), np.nan)
    for b, (_, model) in enumerate(members):
        p = model.order
        for i in range(p, n):
            fitted[b, i] = _one_step_prediction(model, values[:i]) if p else model.intercept
    residuals = []
    fallbacks = 0
    for i in range(n):
        loo = [
            fitted[b, i]
            for b, (idx_set, _) in enumerate(members)
            if i not in idx_set and np.isfinite(fitted[b, i])
        ]
        if not loo:
            loo = [v for v in fitted[:, i] if np.isfinite(v)]
            if not loo:
                continue
            fallbacks += 1
        residuals.append(abs(values[i] - float(np.mean(loo))))
    return np.asarray(residuals), fallbacks


def _block_bootstrap(n: int, block_len: int, rng: np.random.Generator) -> np.ndarray:
    size = min(max(block_len, 1), n)
    n_blocks = math.ceil(n / size)
    starts = rng.integers(0, n - size + 1, size=n_blocks)
    idx = np.concatenate([np.arange(s, s + size) for s in starts])
    return idx[:n]


def enbpi_intervals(
    series: TimeSeries,
    test_len: int,
    spec: EnsembleSpec,
    forecaster: ForecasterSpec,
    alpha: float,
) -> IntervalMatrix:
    """Ensemble bootstrap intervals over the final test_len points.

    The series must include the test block: intervals are issued one step
    ahead, and after each step the realized residual enters the sliding
    window while the oldest entry leaves. Bootstrap members are fitted on
    contiguous concatenations of blocks (block length = seasonal period)
    so serial dependence inside a block survives resampling.
    """
    if test_len < 1:
        raise ValueError(f"test_len must be >= 1, got {test_len}")
    n = len(series)
    if n <= test_len:
        raise ValueError(f"series shorter than test block: {n} <= {test_len}")
    values = series.values
    n_train = n - test_len
    if n_train < 6:
        raise ValueError(f"training span too short for an ensemble: {n_train}")
    rng = np.random.default_rng(spec.seed)
    members = []
    for _ in range(spec.B):
        idx = _block_bootstrap(n_train, series.period, rng)
        sample = values[idx]
        model = fit_auto_ar(sample, forecaster)
        members.append((frozenset(int(i) for i in idx), model))
    loo, fallbacks = enbpi_loo_residuals(values[:n_train], members)
    if len(loo) == 0:
        raise ValueError("no leave-one-out residuals could be formed")
    window = list(loo[-spec.window_len :])
    lower = np.empty(test_len)
    upper = np.empty(test_len)
    for j in range(test_len):
        history = values[: n_train + j]
        yhat = float(np.mean([_one_step_prediction(m, history) for _, m in members]))
        radius = conformal_quantile(np.asarray(window), 1.0 - alpha)
        lower[j] = yhat - radius
        upper[j] = yhat + radius
        window.append(abs(values[n_train + j] - yhat))
        if len(window) > spec.window_len:
            window.pop(0)
    return IntervalMatrix(
        lower=lower.reshape(1, -1),
        upper=upper.reshape(1, -1),
        diagnostics={"loo_fallbacks": fallbacks, "loo_count": len(loo)},
    )


@dataclass(frozen=True)
class SpciSpec:
    """Sequential quantile-regression configuration.

    lag_count is the number of lagged signed residuals used as features;
    beta_grid (optional) lists candidate lower-tail levels inside [0, alpha],
    defaulting to 11 equispaced points.
    """

    lag_count: int = 8
    beta_grid: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.lag_count < 1:
            raise ValueError(f"lag_count must be >= 1, got {self.lag_count}")


def _resolve_beta_grid(spec: SpciSpec, alpha: float) -> np.ndarray:
    if spec.beta_grid is None:
        return np.linspace(0.0, alpha, 11)
    grid = np.asarray(spec.beta_grid, dtype=np.float64)
    if np.any(grid < 0.0) or np.any(grid > alpha):
        raise ValueError(f"beta grid must lie inside [0, {alpha}]")
    return grid


def spci_quantile_pair(
    history: np.ndarray, spec: SpciSpec, alpha: float
) -> tuple[float, float, float, dict]:
    """Predicted (lower, upper) residual quantiles at the next step.

    Fits linear pinball-loss regressions of the signed residual on its
    lag_count predecessors for every candidate level pair (beta, 1-alpha+beta),
    evaluates each pair at the latest lag vector, and keeps the beta whose
    predicted width is smallest. Crossed predictions are swapped and
    counted; a degenerate (constant-feature) design falls back to empirical
    quantiles of the history.
    """
    history = np.asarray(history, dtype=np.float64)
    w = spec.lag_count
    n = len(history)
    if n < w + 10:
        raise ValueError(f"residual history too short: need >= {w + 10}, have {n}")
    betas = _resolve_beta_grid(spec, alpha)
    m = len(betas)
    diag = {"crossings": 0, "fallbacks": 0}
    rows = n - w
    X = np.empty((rows, w))
    for r in range(rows):
        X[r] = history[r : r + w]
    y = history[w:]
    x_star = history[n - w :]
    taus = np.concatenate([betas, 1.0 - alpha + betas])
    if np.all(X.std(axis=0) < 1e-12):
        preds = np.quantile(history, taus)
        diag["fallbacks"] = 1
    else:
        fit = fit_pinball_linear(X, y, taus)
        preds = fit.predict(x_star)
    widths = preds[m:] - preds[:m]
    pick = int(np.argmin(widths))
    q_lo, q_hi = float(preds[pick]), float(preds[m + pick])
    if q_lo > q_hi:
        q_lo, q_hi = q_hi, q_lo
        diag["crossings"] = 1
    diag["beta"] = float(betas[pick])
    return q_lo, q_hi, float(betas[pick]), diag


def spci_interval(
    forecast_value: float, history: np.ndarray, spec: SpciSpec, alpha: float
) -> tuple[float, float, dict]:
    """One interval from the point forecast plus predicted residual quantiles."""
    q_lo, q_hi, _, diag = spci_quantile_pair(history, spec, alpha)
    return forecast_value + q_lo, forecast_value + q_hi, diag


def spci_intervals(
    forecasts: np.ndarray, residuals: ResidualMatrix, spec: SpciSpec, alpha: float
) -> IntervalMatrix:
    """Per-horizon sequential intervals from signed residual streams.

    Each horizon h gets its own quantile regression on that horizon's
    signed residual column, evaluated at the column's latest lag vector.
    """
    if not residuals.signed:
        raise ValueError("spci_intervals requires signed residuals")
    fc = np.asarray(forecasts, dtype=np.float64).ravel()
    horizon = len(fc)
    if horizon > residuals.horizons:
        raise ValueError(
            f"forecast horizon {horizon} exceeds residual horizons {residuals.horizons}"
        )
    lower = np.empty(horizon)
    upper = np.empty(horizon)
    crossings = 0
    fallbacks = 0
    betas = []
    for h in range(1, horizon + 1):
        col = residuals.column(h)
        lo, hi, diag = spci_interval(float(fc[h - 1]), col, spec, alpha)
        lower[h - 1] = lo
        upper[h - 1] = hi
        crossings += diag["crossings"]
        fallbacks += diag["fallbacks"]
        betas.append(diag["beta"])
    return IntervalMatrix(
        lower=lower.reshape(1, -1),
        upper=upper.reshape(1, -1),
        diagnostics={"crossings": crossings, "fallbacks": fallbacks, "betas": betas},
    )


@dataclass(frozen=True)
class GlobalCpResult:
    """Pooled-cohort intervals plus the shared per-horizon radii."""

    intervals: dict
    radii: np.ndarray
    calibration_ids: tuple[str, ...]
    evaluation_ids: tuple[str, ...]
    forecasts: dict


def global_cp_intervals(
    panel: SeriesPanel,
    cohort_split: float,
    forecaster: ForecasterSpec,
    alpha: float,
    horizon: int,
) -> GlobalCpResult:
    """Cross-series conformal intervals with a per-horizon Bonferroni budget.

    The panel is split by SERIES into a calibration cohort and an
    evaluation cohort. Every series gets its own local forecaster fitted on
    all but its final `horizon` points; calibration-cohort absolute
    residuals are pooled per horizon and the shared radius for horizon h is
    the conformal quantile at level 1 - alpha/horizon. Evaluation series
    receive those radii around their own local forecasts.
    """
    if len(panel) < 2:
        raise ValueError("Global-CP requires a cohort: panel has fewer than 2 series")
    if not 0.0 < cohort_split < 1.0:
        raise ValueError(f"cohort_split must be in (0, 1), got {cohort_split}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    ids = panel.ids
    k = min(max(int(round(cohort_split * len(ids))), 1), len(ids) - 1)
    cal_ids, eval_ids = ids[:k], ids[k:]

    def _local(series: TimeSeries) -> np.ndarray:
        if len(series) < horizon + 3:
            raise ValueError(
                f"series {series.series_id!r} too short for horizon {horizon}"
            )
        head = series.values[: len(series) - horizon]
        model = fit_auto_ar(head, forecaster)
        return forecast(model, head, horizon)

    pools: list[list[float]] = [[] for _ in range(horizon)]
    for sid in cal_ids:
        series = panel[sid]
        yhat = _local(series)
        tail = series.values[len(series) - horizon :]
        for h in range(horizon):
            pools[h].append(abs(tail[h] - yhat[h]))
    level = 1.0 - alpha / horizon
    radii = np.empty(horizon)
    for h in range(horizon):
        if not pools[h]:
            raise ValueError(f"pooled residual column for horizon {h + 1} is empty")
        radii[h] = conformal_quantile(np.asarray(pools[h]), level)
    intervals = {}
    fcs = {}
    for sid in eval_ids:
        yhat = _local(panel[sid])
        fcs[sid] = yhat
        intervals[sid] = IntervalMatrix(
            lower=(yhat - radii).reshape(1, -1), upper=(yhat + radii).reshape(1, -1)
        )
    return GlobalCpResult(
        intervals=intervals,
        radii=radii,
        calibration_ids=cal_ids,
        evaluation_ids=eval_ids,
        forecasts=fcs,
    )


def cv_residual_matrix(
    series: TimeSeries, n_windows: int, forecaster: ForecasterSpec, horizon: int
) -> ResidualMatrix:
    """Absolute residuals from n_windows rolling H-step holdout windows.

    Cutoffs step back from the series end in strides of `horizon`; each
    window fits on everything before its cutoff and scores the next
    `horizon` observations.
    """
    if n_windows < 1:
        raise ValueError(f"n_windows must be >= 1, got {n_windows}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    n = len(series)
    earliest = n - n_windows * horizon
    if earliest < 3:
        raise ValueError(
            f"series {series.series_id!r} admits no {n_windows}-window backtest at horizon {horizon}"
        )
    rows = np.empty((n_windows, horizon))
    origins = []
    for w in range(n_windows, 0, -1):
        cutoff = n - w * horizon
        yhat = point_forecast(series.head(cutoff), forecaster, horizon)[0]
        truth = series.values[cutoff : cutoff + horizon]
        rows[n_windows - w] = np.abs(truth - yhat)
        origins.append(cutoff)
    return ResidualMatrix(matrix=rows, origins=tuple(origins), signed=False)


def cv_conformal_intervals(
    series: TimeSeries,
    n_windows: int,
    forecaster: ForecasterSpec,
    alpha: float,
    horizon: int,
) -> IntervalMatrix:
    """Backtest-calibrated intervals around forecasts beyond the series end.

    Per-horizon radii are the empirical (1-alpha) quantiles of the
    backtest residual columns; no finite-sample correction is applied, so
    small n_windows gives anti-conservative intervals (mirroring the
    cross-validation baseline this reproduces).
    """
    residuals = cv_residual_matrix(series, n_windows, forecaster, horizon)
    radii = np.empty(horizon)
    for h in range(1, horizon + 1):
        radii[h - 1] = float(np.quantile(residuals.column(h), 1.0 - alpha))
    yhat = point_forecast(series, forecaster, horizon)[0]
    return IntervalMatrix(
        lower=(yhat - radii).reshape(1, -1), upper=(yhat + radii).reshape(1, -1)
    )


def parametric_intervals(
    model: FittedForecaster, history: np.ndarray | TimeSeries, horizon: int, alpha: float
) -> IntervalMatrix:
    """Gaussian intervals from the AR psi-weight forecast variance."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    yhat = forecast(model, history, horizon)
    sd = sigma_h(model, horizon)
    z = normal_quantile(1.0 - alpha / 2.0)
    return IntervalMatrix(
        lower=(yhat - z * sd).reshape(1, -1), upper=(yhat + z * sd).reshape(1, -1)
    )
