"""Out-of-sample growth-at-risk evaluation over a grid of regressor sets.

At each forecast origin the four conditional quantiles are estimated by
quantile regression on the data available at that date, predicted for the
origin's regressor row, turned into a skew-t by the exactly-identified fit
and scored against the realized outcome.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
import pandas as pd

from ..errors import ConfigError, InsufficientHistory, LayoutMismatch
from .fitting import TAUS, SkewTBox, fit_skewt_to_quantiles
from .quantreg import fit_quantile, predict_quantiles
from .scoring import CRPS_K, CRPS_STEP, LS_CAP, crps, log_score_detail
from .skewt import SkewTParams

REGRESSORS = ("GDP", "NFCI", "SPF", "SSI")
TARGET_COLUMN = "y_ahead"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    regressors: tuple[str, ...]

    @property
    def label(self) -> str:
        return " + ".join(self.regressors) if self.regressors else "intercept"


def _grid() -> tuple[ModelSpec, ...]:
    # the model numbers appear in the output, so this order is fixed;
    # Model 14 is the last pair and Model 15 the full set
    order = [
        ("GDP",), ("NFCI",), ("SPF",), ("SSI",),
        ("GDP", "NFCI"), ("GDP", "SPF"), ("GDP", "SSI"), ("NFCI", "SPF"), ("NFCI", "SSI"),
        ("GDP", "NFCI", "SSI"), ("GDP", "SPF", "SSI"), ("GDP", "NFCI", "SPF"), ("NFCI", "SPF", "SSI"),
        ("SPF", "SSI"), ("GDP", "NFCI", "SPF", "SSI"),
    ]
    return tuple(ModelSpec(f"Model {i}", regs) for i, regs in enumerate(order, start=1))


MODEL_GRID = _grid()
INTERCEPT_ONLY = ModelSpec("Intercept", ())

assert {frozenset(m.regressors) for m in MODEL_GRID} == {
    frozenset(c) for k in range(1, 5) for c in combinations(REGRESSORS, k)
}


@dataclass(frozen=True)
class EvalConfig:
    """Out-of-sample design.

    ``scheme`` is ``'expanding'`` or ``'rolling'``; the first forecast
    origin sits after ``initial_fraction`` of the sample, and a rolling
    window keeps the last ``window`` usable rows (default: the initial
    window length).
    """

    scheme: str = "expanding"
    initial_fraction: float = 0.6
    window: int | None = None
    min_eval_periods: int = 20
    taus: tuple[float, ...] = TAUS
    box: SkewTBox = field(default_factory=SkewTBox)
    seed: int = 0
    ls_cap: float = LS_CAP
    crps_k: float = CRPS_K
    crps_step: float = CRPS_STEP

    def __post_init__(self):
        if self.scheme not in ("expanding", "rolling"):
            raise ConfigError(f"unknown evaluation scheme {self.scheme!r}")
        if not 0 < self.initial_fraction < 1:
            raise ConfigError("initial_fraction must lie in (0, 1)")
        if self.window is not None and self.window < 2:
            raise ConfigError("rolling window must hold at least two rows")


@dataclass(frozen=True)
class GarModelResult:
    model_name: str
    regressors: tuple[str, ...]
    trace: pd.DataFrame = field(repr=False)
    avg_log_score: float
    avg_crps: float
    n_periods: int
    crossing_count: int
    capped_count: int

    @property
    def params(self) -> list[SkewTParams]:
        cols = ["location", "scale", "shape", "dof"]
        return [SkewTParams(*row) for row in self.trace[cols].itertuples(index=False)]


def _strictly_increasing(q: np.ndarray) -> tuple[np.ndarray, bool]:
    # the skew-t fit needs distinct quantiles; separate ties by a tiny margin
    if np.all(np.diff(q) > 0):
        return q, False
    eps = 1e-6 * max(1.0, float(np.max(np.abs(q))))
    out = q.copy()
    for i in range(1, len(out)):
        out[i] = max(out[i], out[i - 1] + eps)
    return out, True


def _origins(index: pd.PeriodIndex, h: int, config: EvalConfig) -> int:
    n = len(index)
    first = int(math.ceil(config.initial_fraction * n))
    n_eval = n - first
    if n_eval < config.min_eval_periods:
        raise InsufficientHistory(
            f"{n} aligned quarters leave {n_eval} evaluation periods after the initial window; "
            f"need at least {config.min_eval_periods}"
        )
    return first


def evaluate_model(data: pd.DataFrame, model: ModelSpec, h: int = 1,
                   config: EvalConfig = EvalConfig()) -> GarModelResult:
    """Score one regressor set out of sample.

    ``data`` is indexed by the quarterly origin ``t`` and holds the
    regressor columns plus ``y_ahead`` (the target at ``t + h``). A row
    enters the training sample of origin ``t_i`` only once its target is
    realized, i.e. when ``t_j + h <= t_i``.
    """
    missing = [r for r in model.regressors if r not in data.columns]
    if missing or TARGET_COLUMN not in data.columns:
        raise LayoutMismatch(f"data lacks column(s) {missing or [TARGET_COLUMN]}")
    index = pd.PeriodIndex(data.index, freq="Q")
    first = _origins(index, h, config)
    ordinal = index.asi8
    y = data[TARGET_COLUMN].to_numpy(dtype=float)
    X = np.column_stack([np.ones(len(data))] + [data[r].to_numpy(dtype=float) for r in model.regressors])
    window = config.window or first

    rows = []
    prev = None
    for i in range(first, len(data)):
        train = np.flatnonzero(ordinal + h <= ordinal[i])
        if config.scheme == "rolling":
            train = train[-window:]
        fits = {tau: fit_quantile(y[train], X[train], tau) for tau in config.taus}
        pred, crossed = predict_quantiles(fits, X[i])
        qs, tied = _strictly_increasing(np.array([pred[t] for t in config.taus]))
        fit = fit_skewt_to_quantiles(dict(zip(config.taus, qs)), box=config.box,
                                     seed=config.seed + i, warm_start=prev)
        prev = fit.params
        ls, capped = log_score_detail(fit.params, y[i], config.ls_cap)
        score = crps(fit.params, y[i], k=config.crps_k, step=config.crps_step)
        rows.append({
            "origin": str(index[i]),
            "target_quarter": str(index[i] + h),
            "n_train": len(train),
            "realized": y[i],
            **{f"q{round(100 * t):02d}": v for t, v in zip(config.taus, qs)},
            "location": fit.params.location,
            "scale": fit.params.scale,
            "shape": fit.params.shape,
            "dof": fit.params.dof,
            "fit_residual": fit.residual,
            "log_score": ls,
            "crps": score,
            "crossed": crossed,
            "tied": tied,
            "ls_capped": capped,
        })
    trace = pd.DataFrame(rows)
    return GarModelResult(
        model_name=model.name,
        regressors=model.regressors,
        trace=trace,
        avg_log_score=float(trace["log_score"].mean()),
        avg_crps=float(trace["crps"].mean()),
        n_periods=len(trace),
        crossing_count=int(trace["crossed"].sum()),
        capped_count=int(trace["ls_capped"].sum()),
    )


def evaluate_models(data: pd.DataFrame, h: int = 1, config: EvalConfig = EvalConfig(),
                    models: Sequence[ModelSpec] = MODEL_GRID) -> list[GarModelResult]:
    """Evaluate every model and sort by average CRPS (ties keep grid order)."""
    results = [evaluate_model(data, m, h, config) for m in models]
    return sorted(results, key=lambda r: r.avg_crps)


def results_frame(results: Sequence[GarModelResult]) -> pd.DataFrame:
    return pd.DataFrame({
        "model": [r.model_name for r in results],
        "regressors": ["+".join(r.regressors) for r in results],
        "avg_ls": [r.avg_log_score for r in results],
        "avg_crps": [r.avg_crps for r in results],
        "n_periods": [r.n_periods for r in results],
        "crossing_count": [r.crossing_count for r in results],
    })


def trace_frame(results: Sequence[GarModelResult]) -> pd.DataFrame:
    """Per-period skew-t parameters of every model, stacked long."""
    parts = []
    for r in results:
        t = r.trace.copy()
        t.insert(0, "model", r.model_name)
        parts.append(t)
    return pd.concat(parts, ignore_index=True)
