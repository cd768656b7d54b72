"""Non-parametric moments of a binned distribution.

Mean and variance use bin midpoints. Median, quartiles, deciles and
octiles come from the piecewise-linear CDF (:func:`spdsignal.spd.quantile`).
Two different modes are used on purpose: :func:`mode` interpolates inside
the run of highest-probability bins using the mass on either side of it,
while :func:`pearson_mode_skewness` takes the plain midpoint of the
highest bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from . import spd
from .errors import (
    DegenerateIQR,
    DegenerateOctiles,
    DegenerateRange,
    IndeterminateMode,
    InsufficientData,
    MeanNearZero,
    NumericalError,
    ZeroStdDev,
)
from .spd import ClosedDistribution

# relative tolerance for treating two bin probabilities as tied
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ExtremeTailRule:
    """Override for Bowley skewness when an open tail bin is very heavy.

    If more than ``threshold`` of the mass sat in the open upper bin the
    skewness is set to ``positive``; likewise ``negative`` for the open
    lower bin. The defaults saturate at the Bowley bounds; pass historical
    skewness quartiles instead to reproduce that variant.
    """

    threshold: float = 0.25
    positive: float = 1.0
    negative: float = -1.0
    enabled: bool = True


@dataclass(frozen=True)
class MomentSet:
    mean: float
    median: float
    mode: float
    variance: float
    cv: float
    bowley: float
    pearson_mode_skew: float
    kelly: float
    moors_kurtosis: float
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "flags"}
        out["flags"] = ";".join(self.flags)
        return out


def _check(d: ClosedDistribution) -> ClosedDistribution:
    if not isinstance(d, ClosedDistribution):
        d = spd.close_open_bins(d)
    return d


def mean(d: ClosedDistribution) -> float:
    d = _check(d)
    return float(np.dot(d.midpoints, d.probs))


def median(d: ClosedDistribution) -> float:
    return spd.quantile(_check(d), 0.5)


def mode(d: ClosedDistribution) -> float:
    """Mode interpolated across the run of maximal bins.

    ``x + r / (r + l) * width`` where ``x`` is the left edge of the run,
    ``width`` its total width and ``l``, ``r`` the masses strictly left
    and right of it.
    """
    d = _check(d)
    p = d.probs
    top = p.max()
    is_max = np.isclose(p, top, rtol=_TIE_RTOL, atol=0.0)
    idx = np.flatnonzero(is_max)
    first, last = int(idx[0]), int(idx[-1])
    if last - first + 1 != idx.size:
        raise IndeterminateMode(f"maximal bins {idx.tolist()} are not adjacent")
    left = float(p[:first].sum())
    right = float(p[last + 1:].sum())
    x = d.edges[first]
    width = d.edges[last + 1] - x
    if left + right == 0:
        return float(x + width / 2)
    return float(x + right / (right + left) * width)


def variance(d: ClosedDistribution) -> float:
    d = _check(d)
    mu = mean(d)
    return float(np.dot((d.midpoints - mu) ** 2, d.probs))


def cv(d: ClosedDistribution, eps_mean: float = 1e-6) -> float:
    mu = mean(d)
    if abs(mu) <= eps_mean:
        raise MeanNearZero(f"mean {mu:.3g} too close to zero for a coefficient of variation")
    return math.sqrt(variance(d)) / mu


def _tail_override(d: ClosedDistribution, rule: ExtremeTailRule):
    if not rule.enabled:
        return None
    hi = d.open_upper_mass
    lo = d.open_lower_mass
    heavy_hi = not math.isnan(hi) and hi > rule.threshold
    heavy_lo = not math.isnan(lo) and lo > rule.threshold
    if heavy_hi and heavy_lo:
        # both tails heavy: the heavier one wins, an exact tie gives no override
        if hi == lo:
            return None
        heavy_hi, heavy_lo = hi > lo, lo > hi
    if heavy_hi:
        return rule.positive
    if heavy_lo:
        return rule.negative
    return None


def _bowley(d: ClosedDistribution, rule: ExtremeTailRule) -> tuple[float, bool]:
    override = _tail_override(d, rule)
    if override is not None:
        return float(override), True
    q1, q2, q3 = spd.quantile(d, np.array([0.25, 0.5, 0.75]))
    if q3 - q1 <= 0:
        raise DegenerateIQR("Q3 equals Q1")
    return float(((q3 - q2) - (q2 - q1)) / (q3 - q1)), False


def bowley_skewness(d: ClosedDistribution, tail_rule: ExtremeTailRule = ExtremeTailRule()) -> float:
    """Quartile skewness ``((Q3 - Q2) - (Q2 - Q1)) / (Q3 - Q1)``."""
    return _bowley(_check(d), tail_rule)[0]


def _max_bin_midpoint(d: ClosedDistribution) -> tuple[float, bool]:
    p = d.probs
    is_max = np.isclose(p, p.max(), rtol=_TIE_RTOL, atol=0.0)
    first = int(np.argmax(is_max))
    return float(d.midpoints[first]), bool(is_max.sum() > 1)


def pearson_mode_skewness(d: ClosedDistribution) -> float:
    """``(mean - mode) / sd`` with the mode at the midpoint of the highest bin.

    Ties go to the first maximal bin.
    """
    d = _check(d)
    sd = math.sqrt(variance(d))
    if sd == 0:
        raise ZeroStdDev("all mass in a single bin")
    m, _ = _max_bin_midpoint(d)
    return (mean(d) - m) / sd


def kelly_skewness(d: ClosedDistribution) -> float:
    p10, p50, p90 = spd.quantile(_check(d), np.array([0.1, 0.5, 0.9]))
    if p90 - p10 <= 0:
        raise DegenerateRange("P90 equals P10")
    return float((p90 - 2 * p50 + p10) / (p90 - p10))


OCTILES = np.arange(1, 8) / 8.0


def moors_kurtosis(d: ClosedDistribution) -> float:
    o = spd.quantile(_check(d), OCTILES)
    # o[k] is the (k+1)/8 quantile
    denom = o[5] - o[1]
    if denom <= 0:
        raise DegenerateOctiles("Q6/8 equals Q2/8")
    return float(((o[6] - o[4]) + (o[2] - o[0])) / denom)


def compute_moments(
    d,
    tail_rule: ExtremeTailRule = ExtremeTailRule(),
    eps_mean: float = 1e-6,
    include_kelly: bool = False,
) -> MomentSet:
    """All estimators for one distribution.

    Estimators that are undefined for this input come back as ``nan`` with
    a flag naming the reason, so a single bad record never aborts a panel.
    """
    d = _check(d)
    flags: list[str] = []

    def attempt(fn, flag):
        try:
            return fn()
        except NumericalError:
            flags.append(flag)
            return math.nan

    mu = mean(d)
    var = variance(d)
    bow = attempt(lambda: _bowley(d, tail_rule), "bowley_undefined")
    if isinstance(bow, tuple):
        bow, saturated = bow
        if saturated:
            flags.append("tail_saturation")
    m = attempt(lambda: mode(d), "mode_indeterminate")
    c = attempt(lambda: cv(d, eps_mean), "cv_undefined")
    pear = attempt(lambda: pearson_mode_skewness(d), "pearson_undefined")
    if _max_bin_midpoint(d)[1]:
        flags.append("pearson_mode_tie")
    kel = attempt(lambda: kelly_skewness(d), "kelly_undefined") if include_kelly else math.nan
    kur = attempt(lambda: moors_kurtosis(d), "kurtosis_undefined")
    return MomentSet(
        mean=mu,
        median=median(d),
        mode=m,
        variance=var,
        cv=c,
        bowley=bow,
        pearson_mode_skew=pear,
        kelly=kel,
        moors_kurtosis=kur,
        flags=tuple(flags),
    )


CORRELATION_LABELS = ("Mean", "CV", "Skewness", "Kurtosis")


def moment_correlations(panel: Iterable[MomentSet], skew: str = "bowley") -> pd.DataFrame:
    """Pooled Pearson correlations of mean, CV, skewness and kurtosis.

    Missing values (e.g. an undefined CV) are dropped pair by pair.
    """
    rows = [(m.mean, m.cv, getattr(m, skew), m.moors_kurtosis) for m in panel]
    frame = pd.DataFrame(rows, columns=list(CORRELATION_LABELS), dtype=float)
    frame = frame.replace([np.inf, -np.inf], np.nan)
    counts = frame.notna().astype(int)
    pair_counts = counts.T @ counts
    if len(frame) < 3 or int(pair_counts.values.min()) < 3:
        raise InsufficientData("need at least 3 complete records for every moment pair")
    corr = frame.corr(method="pearson", min_periods=3)
    if corr.isna().values.any():
        raise InsufficientData("a moment has zero variance across the panel")
    vals = corr.values.copy()
    np.fill_diagonal(vals, 1.0)
    return pd.DataFrame(vals, index=corr.index, columns=corr.columns)


def moment_frame(records: Sequence[MomentSet]) -> pd.DataFrame:
    return pd.DataFrame([r.as_dict() for r in records])
