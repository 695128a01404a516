"""Benchmark orchestration: config, synthetic panels, per-series evaluation,
aggregation, rank tests, and report emission.

Every run is a pure function of (config, data, seed): per-series RNG seeds
are derived by hashing the global seed with the series id, series tasks
share nothing mutable, and results merge in sorted-id order, so the
parallelism degree cannot change any output byte.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .conformal import (
    EnsembleSpec,
    IntervalMatrix,
    ResidualMatrix,
    SpciSpec,
    build_residual_matrix,
    cv_conformal_intervals,
    enbpi_intervals,
    global_cp_intervals,
    mscp_intervals,
    parametric_intervals,
    spci_intervals,
)
from .forecaster import ForecasterSpec, fit_auto_ar, forecast, seasonal_naive_forecast
from .metrics import MethodSummary, MetricRecord, aggregate, series_metrics
from .online import AciState, CoverageEvent, aci_interval, aci_step, acmcp_init, acmcp_interval, acmcp_step
from .series import PanelError, SeriesPanel, SplitSpec, TimeSeries, parse_panel, serialize_panel
from .stattest import FriedmanResult, PosthocResult, conover_posthoc, friedman_test, rank_scores
from .svgchart import cd_diagram_svg, coverage_bar_svg

METHODS = ("mscp", "enbpi", "spci", "global_cp", "cv_cp", "aci", "acmcp", "parametric")
GENERATORS = ("ar1", "seasonal_ar", "shift")


class NothingEvaluableError(RuntimeError):
    """No (series, method) pair could be evaluated."""


class BenchOutputError(RuntimeError):
    """Report files could not be written."""


def series_seed(seed: int, series_id: str) -> int:
    """Stable per-series RNG seed, independent of scheduling order."""
    digest = hashlib.sha256(f"{seed}:{series_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SyntheticSpec:
    """Synthetic panel description.

    ar1 draws a stationary AR(1); seasonal_ar adds a fixed sine cycle of
    the given amplitude on top of the AR noise; shift is an AR(1) with a
    level jump of shift_magnitude at fraction shift_at of the length.
    """

    generator: str = "ar1"
    n_series: int = 200
    length: int = 120
    period: int = 12
    phi: float = 0.8
    sigma: float = 1.0
    amplitude: float = 5.0
    shift_at: float = 0.5
    shift_magnitude: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.n_series < 1:
            raise ValueError(f"n_series must be >= 1, got {self.n_series}")
        if self.length < 8:
            raise ValueError(f"length must be >= 8, got {self.length}")
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if abs(self.phi) >= 1.0:
            raise ValueError(f"stable generators need |phi| < 1, got {self.phi}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 < self.shift_at < 1.0:
            raise ValueError(f"shift_at must be in (0, 1), got {self.shift_at}")


def _ar_noise(rng: np.random.Generator, length: int, phi: float, sigma: float) -> np.ndarray:
    burn = 100
    eps = rng.normal(0.0, sigma, length + burn)
    x = np.empty(length + burn)
    x[0] = eps[0]
    for t in range(1, length + burn):
        x[t] = phi * x[t - 1] + eps[t]
    return x[burn:]


def generate_synthetic(spec: SyntheticSpec) -> SeriesPanel:
    """Seeded panel; identical spec gives an identical panel."""
    out = []
    for i in range(spec.n_series):
        sid = f"s{i:04d}"
        rng = np.random.default_rng(series_seed(spec.seed, sid))
        x = _ar_noise(rng, spec.length, spec.phi, spec.sigma)
        if spec.generator == "seasonal_ar":
            t = np.arange(1, spec.length + 1)
            y = spec.amplitude * np.sin(2.0 * np.pi * t / spec.period) + x
        elif spec.generator == "shift":
            y = x.copy()
            y[int(spec.shift_at * spec.length) :] += spec.shift_magnitude
        else:
            y = x
        out.append(
            TimeSeries(
                sid,
                np.arange(1, spec.length + 1, dtype=np.int64),
                y,
                period=spec.period,
                ds_kind="int",
            )
        )
    return SeriesPanel(tuple(out))


@dataclass(frozen=True)
class BenchConfig:
    """Full run configuration; every field has a usable default except data."""

    data: str | None = None
    alpha: float = 0.1
    horizon: int = 12
    methods: tuple[str, ...] = METHODS
    forecaster: ForecasterSpec = field(default_factory=ForecasterSpec)
    cal_len: int = 36
    train_len: int | None = None
    refit_every: int | None = 1
    period: int = 12
    seed: int = 0
    out_dir: str | None = None
    parallelism: int = 1
    cohort_split: float = 0.5
    n_windows: int = 2
    gamma: float = 0.01
    enbpi_members: int = 20
    enbpi_window: int = 100
    spci_lags: int = 8

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.methods:
            raise ValueError("method list must be nonempty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods: {unknown}; choose from {METHODS}")
        if self.cal_len < 2:
            raise ValueError(f"cal_len must be >= 2, got {self.cal_len}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")
        object.__setattr__(self, "methods", tuple(self.methods))

    def config_hash(self) -> str:
        return hashlib.sha256(repr(dataclasses.asdict(self)).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class BenchmarkReport:
    """Everything a run produced, ready for emission."""

    records: tuple[MetricRecord, ...]
    summaries: dict[str, MethodSummary]
    friedman: FriedmanResult | None
    posthoc: PosthocResult | None
    rank_methods: tuple[str, ...]
    avg_ranks: tuple[float, ...]
    skips: tuple[tuple[str, str, str], ...]
    metadata: dict


def _min_train(period: int) -> int:
    return max(10, 2 * period)


def _aci_series_intervals(
    fc: np.ndarray, abs_matrix: ResidualMatrix, alpha: float, gamma: float
) -> IntervalMatrix:
    """Warm the adaptive level through the calibration h=1 stream, then
    issue per-horizon intervals at the final level."""
    scores = abs_matrix.column(1)
    if len(scores) < 2:
        raise ValueError("adaptive calibration needs >= 2 one-step scores")
    state = AciState(alpha_t=alpha, gamma=gamma, target=alpha)
    pool = [float(scores[0])]
    for s in scores[1:]:
        # Radius of the symmetric interval; the absolute score covers iff s <= radius.
        _, radius = aci_interval(state, 0.0, pool)
        err = 0 if s <= radius else 1
        state = aci_step(state, err)
        pool.append(float(s))
    horizon = len(fc)
    lower = np.empty(horizon)
    upper = np.empty(horizon)
    for h in range(1, horizon + 1):
        lo, hi = aci_interval(state, float(fc[h - 1]), abs_matrix.column(h))
        lower[h - 1] = lo
        upper[h - 1] = hi
    return IntervalMatrix(
        lower=lower.reshape(1, -1),
        upper=upper.reshape(1, -1),
        diagnostics={"alpha_final": state.alpha_t, "warmup_errs": sum(state.err_history)},
    )


def _acmcp_series_intervals(
    fc: np.ndarray, abs_matrix: ResidualMatrix, alpha: float
) -> IntervalMatrix:
    """Run one quantile tracker per horizon through its calibration stream."""
    horizon = len(fc)
    lower = np.empty(horizon)
    upper = np.empty(horizon)
    for h in range(1, horizon + 1):
        stream = abs_matrix.column(h)
        m = len(stream)
        burn = max(5, min(10, m // 3))
        if m < burn + 1:
            raise ValueError(f"horizon {h} stream too short to warm a tracker: {m}")
        state = acmcp_init(h, stream[:burn], alpha)
        for i in range(burn, m):
            radius = max(state.q, 0.0)
            err = 1 if stream[i] > radius else 0
            state = acmcp_step(
                state, CoverageEvent(origin=i, horizon=h, err=err, score=float(stream[i]))
            )
        lo, hi = acmcp_interval(state, float(fc[h - 1]))
        lower[h - 1] = lo
        upper[h - 1] = hi
    return IntervalMatrix(lower=lower.reshape(1, -1), upper=upper.reshape(1, -1))


def _series_task(
    series: TimeSeries, config: BenchConfig
) -> tuple[str, dict[str, MetricRecord], list[tuple[str, str, str]]]:
    sid = series.series_id
    H, alpha = config.horizon, config.alpha
    fc_spec = config.forecaster
    n = len(series)
    train_len = config.train_len if config.train_len is not None else n - config.cal_len - H
    sspec = SplitSpec(train_len, config.cal_len, H)
    truth = series.values[n - H :]
    traincal = series.values[: n - H]
    head = series.head(n - H)
    records: dict[str, MetricRecord] = {}
    skips: list[tuple[str, str, str]] = []

    needs_matrix = bool({"mscp", "spci", "aci", "acmcp"} & set(config.methods))
    signed = abs_matrix = None
    matrix_err: str | None = None
    if needs_matrix:
        try:
            signed = build_residual_matrix(
                series, sspec, fc_spec, H, config.refit_every, signed=True
            )
            abs_matrix = ResidualMatrix(
                np.abs(signed.matrix), signed.origins, signed=False
            )
        except (ValueError, np.linalg.LinAlgError) as e:
            matrix_err = str(e)

    model = None
    fc = None
    fc_err: str | None = None
    try:
        if fc_spec.kind == "auto_ar":
            model = fit_auto_ar(traincal, fc_spec)
            fc = forecast(model, traincal, H)
        else:
            fc = seasonal_naive_forecast(head, H)
    except ValueError as e:
        fc_err = str(e)

    for method in config.methods:
        if method == "global_cp":
            continue
        try:
            if fc_err is not None and method != "enbpi":
                raise ValueError(fc_err)
            if method in ("mscp", "spci", "aci", "acmcp") and matrix_err is not None:
                raise ValueError(matrix_err)
            if method == "mscp":
                iv = mscp_intervals(fc, abs_matrix, alpha)
            elif method == "spci":
                iv = spci_intervals(fc, signed, SpciSpec(lag_count=config.spci_lags), alpha)
            elif method == "aci":
                iv = _aci_series_intervals(fc, abs_matrix, alpha, config.gamma)
            elif method == "acmcp":
                iv = _acmcp_series_intervals(fc, abs_matrix, alpha)
            elif method == "enbpi":
                spec = EnsembleSpec(
                    B=config.enbpi_members,
                    window_len=config.enbpi_window,
                    seed=series_seed(config.seed, sid),
                )
                iv = enbpi_intervals(series, H, spec, fc_spec, alpha)
            elif method == "cv_cp":
                iv = cv_conformal_intervals(head, config.n_windows, fc_spec, alpha, H)
            elif method == "parametric":
                if model is None:
                    raise ValueError(
                        "parametric intervals require an autoregressive forecaster"
                    )
                iv = parametric_intervals(model, traincal, H, alpha)
            else:
                raise ValueError(f"unknown method {method!r}")
            records[method] = series_metrics(sid, method, iv, truth, alpha)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            skips.append((sid, method, str(e)))
    return sid, records, skips


def run_benchmark(config: BenchConfig, panel: SeriesPanel | None = None) -> BenchmarkReport:
    """Evaluate every configured method on every evaluable series.

    Raises PanelError for unreadable/unparseable data and
    NothingEvaluableError when no (series, method) pair can be scored.
    Per-method failures on individual series become skip entries instead
    of aborting the run.
    """
    t0 = time.perf_counter()
    if panel is None:
        if config.data is None:
            raise PanelError("no data source: set the data path or pass a panel")
        try:
            text = Path(config.data).read_text()
        except OSError as e:
            raise PanelError(f"cannot read data file {config.data!r}: {e}") from None
        panel = parse_panel(text, period=config.period)

    H = config.horizon
    skips: list[tuple[str, str, str]] = []
    eligible: list[TimeSeries] = []
    for series in panel:
        n = len(series)
        train_len = config.train_len if config.train_len is not None else n - config.cal_len - H
        if train_len < _min_train(series.period) or n < train_len + config.cal_len + H:
            reason = f"series too short: {n} observations for train {train_len}, cal {config.cal_len}, test {H}"
            skips.extend((series.series_id, m, reason) for m in config.methods)
            continue
        eligible.append(series)
    if not eligible:
        raise NothingEvaluableError("no series long enough to evaluate")

    global_records: dict[str, MetricRecord] = {}
    if "global_cp" in config.methods:
        try:
            sub = SeriesPanel(tuple(eligible))
            result = global_cp_intervals(
                sub, config.cohort_split, config.forecaster, config.alpha, H
            )
        except ValueError as e:
            if set(config.methods) == {"global_cp"}:
                raise NothingEvaluableError(str(e)) from None
            skips.extend((s.series_id, "global_cp", str(e)) for s in eligible)
        else:
            for sid in result.calibration_ids:
                skips.append((sid, "global_cp", "spent as pooled calibration cohort"))
            for sid in result.evaluation_ids:
                series = panel[sid]
                truth = series.values[len(series) - H :]
                global_records[sid] = series_metrics(
                    sid, "global_cp", result.intervals[sid], truth, config.alpha
                )

    if config.parallelism > 1 and len(eligible) > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(lambda s: _series_task(s, config), eligible))
    else:
        results = [_series_task(s, config) for s in eligible]

    records: list[MetricRecord] = []
    for sid, recs, task_skips in results:
        if sid in global_records:
            recs = dict(recs)
            recs["global_cp"] = global_records[sid]
        records.extend(recs[m] for m in config.methods if m in recs)
        skips.extend(task_skips)
    if not records:
        raise NothingEvaluableError("every (series, method) evaluation was skipped")
    records.sort(key=lambda r: (r.series_id, r.method))
    skips.sort(key=lambda s: (s[0], s[1]))
    summaries = aggregate(records)

    by_series: dict[str, dict[str, MetricRecord]] = {}
    for rec in records:
        by_series.setdefault(rec.series_id, {})[rec.method] = rec
    rank_methods = tuple(m for m in config.methods if m in summaries)
    complete = [
        sid
        for sid in sorted(by_series)
        if all(
            m in by_series[sid] and math.isfinite(by_series[sid][m].winkler)
            for m in rank_methods
        )
    ]
    friedman = posthoc = None
    avg_ranks: tuple[float, ...] = ()
    if len(rank_methods) >= 2 and len(complete) >= 2:
        matrix = np.array(
            [[by_series[sid][m].winkler for m in rank_methods] for sid in complete]
        )
        table = rank_scores(matrix)
        friedman = friedman_test(table)
        avg_ranks = tuple(float(r) for r in table.avg_ranks)
        if friedman.p_value < 0.05:
            posthoc = conover_posthoc(table, alpha=0.05)

    metadata = {
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "alpha": config.alpha,
        "horizon": H,
        "methods": list(config.methods),
        "n_series": len(panel),
        "n_series_evaluated": len(eligible),
        "n_rank_series": len(complete) if len(rank_methods) >= 2 else 0,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    return BenchmarkReport(
        records=tuple(records),
        summaries=summaries,
        friedman=friedman,
        posthoc=posthoc,
        rank_methods=rank_methods,
        avg_ranks=avg_ranks,
        skips=tuple(skips),
        metadata=metadata,
    )


def _json_safe(value: float) -> float | None:
    return value if math.isfinite(value) else None


def summary_payload(report: BenchmarkReport) -> dict:
    """JSON-ready view of a report; everything volatile sits under metadata."""
    methods = {
        m: {
            "n_series": s.n_series,
            "coverage": round(s.coverage, 10),
            "width": _json_safe(round(s.width, 10) if math.isfinite(s.width) else s.width),
            "winkler": _json_safe(
                round(s.winkler, 10) if math.isfinite(s.winkler) else s.winkler
            ),
            "joint_coverage": round(s.joint_coverage, 10),
            "infinite_cells": s.infinite_cells,
        }
        for m, s in report.summaries.items()
    }
    friedman = None
    if report.friedman is not None:
        friedman = {
            "statistic": round(report.friedman.statistic, 10),
            "df": report.friedman.df,
            "p_value": round(report.friedman.p_value, 12),
            "methods": list(report.rank_methods),
            "avg_ranks": [round(r, 10) for r in report.avg_ranks],
        }
    posthoc = None
    if report.posthoc is not None:
        posthoc = {
            "cd": round(report.posthoc.cd, 10),
            "cliques": [
                [report.rank_methods[i] for i in clique]
                for clique in report.posthoc.cliques
            ],
        }
    return {
        "methods": methods,
        "friedman": friedman,
        "posthoc": posthoc,
        "skips": [list(s) for s in report.skips],
        "metadata": report.metadata,
    }


def emit_reports(report: BenchmarkReport, out_dir: str) -> dict[str, str]:
    """Write metrics.csv, summary.json, coverage.svg, and cd.svg."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {}

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["series", "method", "coverage", "width", "winkler"])
        for rec in report.records:
            writer.writerow(
                [
                    rec.series_id,
                    rec.method,
                    repr(rec.marginal_coverage),
                    repr(rec.mean_width),
                    repr(rec.winkler),
                ]
            )
        paths["metrics"] = os.path.join(out_dir, "metrics.csv")
        Path(paths["metrics"]).write_text(buf.getvalue())

        paths["summary"] = os.path.join(out_dir, "summary.json")
        Path(paths["summary"]).write_text(
            json.dumps(summary_payload(report), indent=2, sort_keys=True) + "\n"
        )

        cov_methods = [m for m in report.metadata["methods"] if m in report.summaries]
        coverages = [report.summaries[m].coverage for m in cov_methods]
        target = 1.0 - report.metadata["alpha"]
        paths["coverage"] = os.path.join(out_dir, "coverage.svg")
        Path(paths["coverage"]).write_text(
            coverage_bar_svg(cov_methods, coverages, target)
        )

        if report.rank_methods and report.avg_ranks:
            cd_methods = list(report.rank_methods)
            ranks = list(report.avg_ranks)
            if report.posthoc is not None:
                cliques = report.posthoc.cliques
                cd = report.posthoc.cd
            else:
                cliques = (tuple(range(len(cd_methods))),)
                cd = None
        else:
            cd_methods = cov_methods
            order = np.argsort(
                [
                    report.summaries[m].winkler
                    if math.isfinite(report.summaries[m].winkler)
                    else math.inf
                    for m in cd_methods
                ],
                kind="stable",
            )
            ranks = [0.0] * len(cd_methods)
            for pos, idx in enumerate(order):
                ranks[idx] = float(pos + 1)
            cliques = (tuple(range(len(cd_methods))),)
            cd = None
        paths["cd"] = os.path.join(out_dir, "cd.svg")
        Path(paths["cd"]).write_text(cd_diagram_svg(cd_methods, ranks, cliques, cd))
        return paths
    except OSError as e:
        raise BenchOutputError(f"cannot write reports to {out_dir!r}: {e}") from None


_CONFIG_KEYS = {
    "data": str,
    "alpha": float,
    "horizon": int,
    "methods": str,
    "cal_len": int,
    "train_len": int,
    "refit_every": str,
    "period": int,
    "seed": int,
    "out": str,
    "parallelism": int,
    "cohort_split": float,
    "n_windows": int,
    "gamma": float,
    "enbpi_members": int,
    "enbpi_window": int,
    "spci_lags": int,
    "forecaster": str,
    "max_order": int,
    "include_drift": str,
}


def parse_config_text(text: str) -> dict[str, str]:
    """key = value lines; # starts a comment; quotes around values optional."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip().strip("\"'")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_config(file_values: dict[str, str] | None = None, **overrides) -> BenchConfig:
    """Merge config-file values with explicit overrides (overrides win)."""
    raw: dict[str, str] = dict(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            raw[key] = str(value)
    kwargs: dict = {}
    fc_kwargs: dict = {}
    for key, value in raw.items():
        if key == "methods":
            kwargs["methods"] = tuple(m.strip() for m in value.split(",") if m.strip())
        elif key == "out":
            kwargs["out_dir"] = value
        elif key == "refit_every":
            kwargs["refit_every"] = None if value.lower() in ("none", "never") else int(value)
        elif key == "train_len":
            kwargs["train_len"] = int(value)
        elif key == "forecaster":
            fc_kwargs["kind"] = value
        elif key == "max_order":
            fc_kwargs["max_order"] = int(value)
        elif key == "include_drift":
            fc_kwargs["include_drift"] = value.lower() in ("1", "true", "yes")
        else:
            kwargs[key] = _CONFIG_KEYS[key](value)
    if fc_kwargs:
        kwargs["forecaster"] = ForecasterSpec(**fc_kwargs)
    return BenchConfig(**kwargs)


def write_panel_csv(panel: SeriesPanel, path: str) -> None:
    try:
        Path(path).write_text(serialize_panel(panel))
    except OSError as e:
        raise BenchOutputError(f"cannot write panel to {path!r}: {e}") from None
