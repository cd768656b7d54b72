"""Strong / weak signal classification and the Signal Strength Index.

A forecast sends a *strong* signal when its median deviation from the
target and its skewness point the same way, and a *weak* one when they
disagree. Per round, the cross-section is aggregated into ``q_bar``
(median deviation) and ``a_bar`` (forecaster-demeaned skewness); both are
normalized to ``[-1, 1]`` and combined into the index::

    ssi = q_bar * (|qn| * |an| * (1 + sq * sa) / 2
                   + (qn + an) / 2 * (1 - sq * sa) / 2)

with ``sq = sign(q_bar)`` and ``sa = sign(a_bar)``. ``sign(0) == 0``, so a
round where either component is exactly zero gives both terms weight 1/2.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import AlignmentError, AllZeroSeries, EmptyRound


class SignalClass(str, enum.Enum):
    STRONG_UP = "StrongUp"
    WEAK_UP = "WeakUp"
    WEAK_DOWN = "WeakDown"
    STRONG_DOWN = "StrongDown"
    NEUTRAL = "Neutral"


def classify(median_dev: float, skew: float) -> SignalClass:
    """Quadrant of ``(median - target, skewness)``; zeros are Neutral."""
    if median_dev == 0 or skew == 0 or np.isnan(median_dev) or np.isnan(skew):
        return SignalClass.NEUTRAL
    if skew > 0:
        return SignalClass.STRONG_UP if median_dev > 0 else SignalClass.WEAK_UP
    return SignalClass.STRONG_DOWN if median_dev < 0 else SignalClass.WEAK_DOWN


@dataclass(frozen=True)
class SignalRecord:
    forecaster_id: str
    round: pd.Period
    horizon: str
    median_dev: float
    skew: float
    signal_class: SignalClass


def demean_skew_by_forecaster(
    panel: pd.DataFrame,
    skew_col: str = "skew",
    by: Sequence[str] = ("forecaster_id",),
) -> pd.DataFrame:
    """Subtract each forecaster's own average skewness.

    Returns a copy of ``panel`` with ``skew_col`` replaced. Rows with a
    missing skewness stay missing and do not enter the averages.
    """
    out = panel.copy()
    grouped = out.groupby(list(by), sort=False)[skew_col]
    out[skew_col] = out[skew_col] - grouped.transform("mean")
    return out


def build_records(frame: pd.DataFrame, target: float, skew_col: str = "bowley") -> pd.DataFrame:
    """Signal records from a moments table.

    ``frame`` needs ``forecaster_id``, ``round``, ``horizon``, ``median`` and
    ``skew_col``. Skewness is demeaned per forecaster and horizon before
    classification.
    """
    recs = frame[["forecaster_id", "round", "horizon"]].copy()
    recs["median_dev"] = frame["median"].astype(float) - target
    recs["skew"] = frame[skew_col].astype(float)
    recs = recs[np.isfinite(recs["skew"]) & np.isfinite(recs["median_dev"])]
    recs = demean_skew_by_forecaster(recs, by=("forecaster_id", "horizon"))
    recs["signal_class"] = [
        classify(q, a).value for q, a in zip(recs["median_dev"], recs["skew"])
    ]
    return recs.reset_index(drop=True)


_CLASS_COLUMNS = {c.value: f"share_{c.value}" for c in SignalClass}


def aggregate_round(records: pd.DataFrame, method: str = "mean") -> pd.DataFrame:
    """Cross-sectional summary per round.

    Columns: ``q_bar``, ``a_bar`` (mean or median across forecasters),
    their first and third quartiles (``q_q1``, ``q_q3``, ``a_q1``,
    ``a_q3``), the number of forecasters and the share of each signal
    class.
    """
    if method not in ("mean", "median"):
        raise ValueError(f"aggregation method must be 'mean' or 'median', got {method!r}")
    if len(records) == 0:
        raise EmptyRound("no signal records to aggregate")
    g = records.groupby("round", sort=True)
    out = pd.DataFrame(
        {
            "q_bar": g["median_dev"].agg(method),
            "a_bar": g["skew"].agg(method),
            "q_q1": g["median_dev"].quantile(0.25),
            "q_q3": g["median_dev"].quantile(0.75),
            "a_q1": g["skew"].quantile(0.25),
            "a_q3": g["skew"].quantile(0.75),
            "n": g.size(),
        }
    )
    if "signal_class" in records:
        shares = pd.crosstab(records["round"], records["signal_class"], normalize="index")
        for cls, col in _CLASS_COLUMNS.items():
            out[col] = shares[cls] if cls in shares else 0.0
    return out


@dataclass(frozen=True)
class NormScheme:
    """``kind='full'`` divides by the full-sample max-abs value.

    ``kind='rolling'`` divides each point by the max-abs value over the
    trailing ``window`` observations (no look-ahead); ``'expanding'`` uses
    everything up to and including the point.
    """

    kind: str = "full"
    window: int = 8

    def __post_init__(self):
        if self.kind not in ("full", "rolling", "expanding"):
            raise ValueError(f"unknown normalization scheme {self.kind!r}")
        if self.window < 1:
            raise ValueError("rolling window must be at least 1")


def normalize_series(x, scheme: NormScheme = NormScheme()):
    s = pd.Series(x, dtype=float) if not isinstance(x, pd.Series) else x.astype(float)
    if len(s) == 0 or not np.any(s.abs().values > 0):
        raise AllZeroSeries("cannot normalize an empty or all-zero series")
    mag = s.abs()
    if scheme.kind == "full":
        denom = pd.Series(mag.max(), index=s.index)
    elif scheme.kind == "expanding":
        denom = mag.expanding().max()
    else:
        denom = mag.rolling(scheme.window, min_periods=1).max()
    out = s / denom.where(denom > 0)
    out = out.fillna(0.0)
    if isinstance(x, pd.Series):
        return out
    return out.to_numpy()


def ssi_value(q_bar, a_bar, q_norm, a_norm):
    """Evaluate the index formula elementwise on already-normalized inputs."""
    q_bar = np.asarray(q_bar, dtype=float)
    sp = np.sign(np.asarray(a_bar, dtype=float)) * np.sign(q_bar)
    q_norm = np.asarray(q_norm, dtype=float)
    a_norm = np.asarray(a_norm, dtype=float)
    agree = np.abs(q_norm) * np.abs(a_norm) * (1 + sp) / 2
    differ = (q_norm + a_norm) / 2 * (1 - sp) / 2
    return q_bar * (agree + differ)


@dataclass(frozen=True)
class SsiSeries:
    rounds: pd.Index
    q_bar: pd.Series
    a_bar: pd.Series
    q_norm: pd.Series
    a_norm: pd.Series
    ssi: pd.Series

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "q_bar": self.q_bar,
                "a_bar": self.a_bar,
                "q_norm": self.q_norm,
                "a_norm": self.a_norm,
                "ssi": self.ssi,
            },
            index=self.rounds,
        )


def _normalize_or_zero(x: pd.Series, scheme: NormScheme) -> pd.Series:
    # a component that is identically zero carries no signal; its normalized
    # value is zero rather than an error, so e.g. Q = 0 everywhere gives SSI = 0
    if len(x) and not np.any(x.abs().values > 0):
        return pd.Series(0.0, index=x.index)
    return normalize_series(x, scheme)


def ssi(q_bar: pd.Series, a_bar: pd.Series, scheme: NormScheme = NormScheme()) -> SsiSeries:
    q_bar = pd.Series(q_bar, dtype=float) if not isinstance(q_bar, pd.Series) else q_bar.astype(float)
    a_bar = pd.Series(a_bar, dtype=float) if not isinstance(a_bar, pd.Series) else a_bar.astype(float)
    if len(q_bar) != len(a_bar) or not q_bar.index.equals(a_bar.index):
        raise AlignmentError("q_bar and a_bar are not indexed by the same rounds")
    q_norm = _normalize_or_zero(q_bar, scheme)
    a_norm = _normalize_or_zero(a_bar, scheme)
    values = ssi_value(q_bar.values, a_bar.values, q_norm.values, a_norm.values)
    return SsiSeries(
        rounds=q_bar.index,
        q_bar=q_bar,
        a_bar=a_bar,
        q_norm=q_norm,
        a_norm=a_norm,
        ssi=pd.Series(values, index=q_bar.index, name="ssi"),
    )
