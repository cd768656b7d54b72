"""Panel-level glue: histograms -> moments -> signals -> index -> GaR table."""
from __future__ import annotations

import numpy as np
import pandas as pd

from .errors import ConfigError, EmptyRound, InsufficientData
from .ingest import AlignedTable, SpdPanel, align
from .moments import ExtremeTailRule, MomentSet, compute_moments, moment_correlations
from .signal import NormScheme, SsiSeries, aggregate_round, build_records, ssi
from .spd import TailPolicy, close_open_bins

KEY_COLUMNS = ["forecaster_id", "round", "horizon", "variable"]


def single_slice(panel: SpdPanel, horizon: str | None = None, variable: str | None = None) -> SpdPanel:
    """Restrict the panel to one horizon and variable.

    ``None`` accepts the panel's only value and refuses to guess when there
    are several.
    """
    for attr, chosen in (("horizon", horizon), ("variable", variable)):
        present = sorted({getattr(r, attr) for r in panel})
        if chosen is None and len(present) > 1:
            raise ConfigError(f"panel holds several {attr} values {present}; choose one in the config")
        if chosen is not None and chosen not in present:
            raise ConfigError(f"{attr} {chosen!r} not in panel (found {present})")
    return panel.select(horizon=horizon, variable=variable)


def moments_table(panel: SpdPanel, policy: TailPolicy = TailPolicy(),
                  tail_rule: ExtremeTailRule = ExtremeTailRule(),
                  include_kelly: bool = False) -> tuple[pd.DataFrame, list[MomentSet]]:
    """One row per histogram with every moment, the open-tail masses and flags."""
    if len(panel) == 0:
        raise InsufficientData("the survey panel is empty")
    rows, sets = [], []
    for r in panel:
        closed = close_open_bins(r.dist, policy)
        m = compute_moments(closed, tail_rule=tail_rule, include_kelly=include_kelly)
        sets.append(m)
        row = {
            "forecaster_id": r.forecaster_id,
            "round": str(r.round),
            "horizon": r.horizon,
            "variable": r.variable,
            **m.as_dict(),
            "open_lower_mass": closed.open_lower_mass,
            "open_upper_mass": closed.open_upper_mass,
        }
        rows.append(row)
    return pd.DataFrame(rows), sets


def correlation_table(sets: list[MomentSet], skew: str = "bowley") -> pd.DataFrame:
    return moment_correlations(sets, skew=skew)


def signal_records(moments: pd.DataFrame, target: float, skew: str = "bowley") -> pd.DataFrame:
    return build_records(moments, target, skew_col=skew)


def index_series(records: pd.DataFrame, method: str = "mean",
                 scheme: NormScheme = NormScheme()) -> tuple[SsiSeries, pd.DataFrame]:
    """Aggregate per round and compute the signal strength index."""
    summary = aggregate_round(records, method)
    if len(summary) < 2:
        raise EmptyRound(f"need at least two rounds, got {len(summary)}")
    return ssi(summary["q_bar"], summary["a_bar"], scheme), summary


def spf_series(moments: pd.DataFrame, how: str = "mean") -> pd.Series:
    """Cross-sectional mean (or median) of the histogram means per round."""
    if how not in ("mean", "median"):
        raise ConfigError(f"spf aggregation must be 'mean' or 'median', got {how!r}")
    s = moments.groupby("round", sort=True)["mean"].agg(how)
    s.index = pd.PeriodIndex(s.index, freq="Q")
    return s.rename("SPF")


def gar_table(gdp: pd.Series, nfci: pd.Series, spf: pd.Series, ssi_values: pd.Series,
              h: int = 1) -> AlignedTable:
    """Regression table with columns GDP, NFCI, SPF, SSI and ``y_ahead``."""
    def quarterly(s):
        s = s.copy()
        if not isinstance(s.index, pd.PeriodIndex):
            s.index = pd.PeriodIndex(s.index, freq="Q")
        return s.astype(float)

    series = {
        "GDP": quarterly(gdp),
        "NFCI": quarterly(nfci),
        "SPF": quarterly(spf),
        "SSI": quarterly(ssi_values),
    }
    for name, s in series.items():
        if not np.isfinite(s.to_numpy()).any():
            raise InsufficientData(f"series {name} has no finite values")
    return align(series, target="GDP", h=h, regressors=["GDP", "NFCI", "SPF", "SSI"])
