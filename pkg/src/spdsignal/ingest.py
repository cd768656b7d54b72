"""CSV ingestion for survey histograms and quarterly macro series.

Survey histograms use a long format, one row per bin::

    forecaster_id,round,horizon,variable,bin_lower,bin_upper,prob_percent
    45,2024-06-01,1y,inflation,,1.0,5
    45,2024-06-01,1y,inflation,1.0,1.5,20
    ...

An empty ``bin_lower`` / ``bin_upper`` cell marks an open tail. The
``variable`` column is optional. Probabilities are in percent and are
normalized per histogram. Rounds may be ISO dates or ``YYYYQn`` labels and
are snapped to their calendar quarter.

Macro series are ``date,value`` files; higher-frequency inputs are reduced
to quarters by last observation or by averaging.
"""
from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .errors import (
    DuplicateQuarter,
    NegativeProbability,
    NoOverlap,
    NonContiguousBins,
    ParseError,
    SchemaError,
)
from .spd import BinnedDistribution

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpdSchema:
    forecaster: str = "forecaster_id"
    round: str = "round"
    horizon: str = "horizon"
    variable: str = "variable"
    lower: str = "bin_lower"
    upper: str = "bin_upper"
    prob: str = "prob_percent"
    default_variable: str = "inflation"

    @property
    def required(self) -> tuple[str, ...]:
        return (self.forecaster, self.round, self.horizon, self.lower, self.upper, self.prob)


@dataclass(frozen=True, eq=False)
class SpdRecord:
    forecaster_id: str
    round: pd.Period
    horizon: str
    variable: str
    dist: BinnedDistribution
    percent: np.ndarray = field(repr=False)
    lines: tuple[int, ...] = field(default=(), repr=False)

    @property
    def key(self):
        return (self.forecaster_id, self.round, self.horizon, self.variable)


@dataclass(frozen=True)
class SpdPanel:
    records: tuple[SpdRecord, ...]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def select(self, horizon: str | None = None, variable: str | None = None) -> "SpdPanel":
        keep = tuple(
            r
            for r in self.records
            if (horizon is None or r.horizon == horizon) and (variable is None or r.variable == variable)
        )
        return SpdPanel(keep)

    @property
    def rounds(self) -> list[pd.Period]:
        return sorted({r.round for r in self.records})


def to_quarter(value) -> pd.Period:
    """Snap a date or ``YYYYQn`` label to its calendar quarter."""
    if isinstance(value, pd.Period):
        return value.asfreq("Q")
    text = str(value).strip()
    try:
        return pd.Period(text, freq="Q")
    except (ValueError, TypeError):
        pass
    return pd.Timestamp(text).to_period("Q")


def _edge(cell: str):
    cell = cell.strip()
    if cell == "" or cell.lower() in ("-inf", "inf", "+inf", "none", "nan"):
        return None
    return float(cell)


def parse_spd_csv(path, schema: SpdSchema = SpdSchema()) -> SpdPanel:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty", lines=(1,)) from None
        missing = [c for c in schema.required if c not in header]
        if missing:
            raise SchemaError(f"{path}: header lacks column(s) {missing}", lines=(1,))
        col = {name: header.index(name) for name in header}
        has_var = schema.variable in col

        groups: dict[tuple, list] = defaultdict(list)
        seen: dict[tuple, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}: expected {len(header)} fields, got {len(row)}", lines=(lineno,))
            try:
                fid = row[col[schema.forecaster]].strip()
                rnd = to_quarter(row[col[schema.round]])
                hor = row[col[schema.horizon]].strip()
                var = row[col[schema.variable]].strip() if has_var else schema.default_variable
                lo = _edge(row[col[schema.lower]])
                hi = _edge(row[col[schema.upper]])
                prob = float(row[col[schema.prob]])
            except (ValueError, TypeError) as exc:
                raise SchemaError(f"{path}: {exc}", lines=(lineno,)) from None
            if not fid or not hor:
                raise SchemaError(f"{path}: empty forecaster or horizon", lines=(lineno,))
            if not math.isfinite(prob):
                raise SchemaError(f"{path}: probability is not finite", lines=(lineno,))
            if prob < 0:
                raise NegativeProbability(f"{path}: negative probability {prob} on line {lineno}")
            key = (fid, rnd, hor, var)
            bin_key = key + (lo, hi)
            if bin_key in seen:
                raise SchemaError(f"{path}: duplicate bin {bin_key}", lines=(seen[bin_key], lineno))
            seen[bin_key] = lineno
            groups[key].append((lo, hi, prob, lineno))

    records = []
    for key, rows in groups.items():
        rows.sort(key=lambda r: -math.inf if r[0] is None else r[0])
        bins = [(lo, hi) for lo, hi, _, _ in rows]
        percent = np.array([p for _, _, p, _ in rows])
        lines = tuple(r[3] for r in rows)
        try:
            dist = BinnedDistribution.from_bins(bins, percent / 100.0)
        except NonContiguousBins as exc:
            raise NonContiguousBins(f"{path}: {key} lines {lines}: {exc}") from None
        total = dist.probs.sum()
        if total <= 0:
            raise SchemaError(f"{path}: histogram {key} has zero total probability", lines=lines)
        dist = BinnedDistribution(dist.edges, dist.probs / total)
        percent.setflags(write=False)
        records.append(SpdRecord(key[0], key[1], key[2], key[3], dist, percent, lines))
    records.sort(key=lambda r: (r.round, r.horizon, r.variable, r.forecaster_id))
    return SpdPanel(tuple(records))


def _fmt_edge(x: float) -> str:
    return "" if math.isinf(x) else repr(float(x))


def write_spd_csv(panel: SpdPanel, path, schema: SpdSchema = SpdSchema()) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([schema.forecaster, schema.round, schema.horizon, schema.variable,
                    schema.lower, schema.upper, schema.prob])
        for r in panel:
            e = r.dist.edges
            for i, p in enumerate(r.percent):
                w.writerow([r.forecaster_id, str(r.round), r.horizon, r.variable,
                            _fmt_edge(e[i]), _fmt_edge(e[i + 1]), repr(float(p))])


@dataclass(frozen=True)
class MacroSeries:
    name: str
    series: pd.Series
    transform: str = "level"

    @property
    def dates(self) -> pd.PeriodIndex:
        return self.series.index

    @property
    def values(self) -> np.ndarray:
        return self.series.to_numpy()

    def __len__(self):
        return len(self.series)


def load_macro_csv(path, name: str | None = None, aggregate: str | None = None,
                   transform: str = "level") -> MacroSeries:
    """Read a ``date,value`` CSV into a quarterly series.

    ``aggregate=None`` expects at most one observation per quarter and
    raises :class:`DuplicateQuarter` otherwise; ``'last'`` keeps the last
    observation of each quarter (financial-conditions indices), ``'mean'``
    averages them.
    """
    path = Path(path)
    if aggregate not in (None, "last", "mean"):
        raise ValueError(f"aggregate must be None, 'last' or 'mean', got {aggregate!r}")
    dates, values = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ParseError(f"{path}: expected a 'date,value' header")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                dates.append(pd.Timestamp(row[0].strip()) if "Q" not in row[0].upper()
                             else pd.Period(row[0].strip(), freq="Q").start_time)
                values.append(float(row[1]) if row[1].strip() else math.nan)
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
    if not dates:
        raise ParseError(f"{path}: no observations")
    s = pd.Series(values, index=pd.DatetimeIndex(dates), dtype=float)
    if not s.index.is_monotonic_increasing:
        log.warning("%s: dates are not sorted; sorting", path)
        s = s.sort_index(kind="stable")
    if s.index.has_duplicates:
        dup = s.index[s.index.duplicated()][0]
        raise DuplicateQuarter(f"{path}: date {dup.date()} appears more than once")
    quarters = s.index.to_period("Q")
    if aggregate is None:
        if quarters.has_duplicates:
            dup = quarters[quarters.duplicated()][0]
            raise DuplicateQuarter(f"{path}: more than one observation in {dup}")
        q = pd.Series(s.to_numpy(), index=quarters)
    else:
        grouped = s.dropna().groupby(quarters[s.notna()])
        q = grouped.last() if aggregate == "last" else grouped.mean()
    q.index = pd.PeriodIndex(q.index, freq="Q")
    q.name = name or header[1].strip() or path.stem
    return MacroSeries(q.name, q, transform)


@dataclass(frozen=True)
class AlignedTable:
    frame: pd.DataFrame
    dropped: int
    target: str
    h: int

    @property
    def regressors(self) -> list[str]:
        return [c for c in self.frame.columns if c != "y_ahead"]


def align(series: Mapping[str, pd.Series], target: str, h: int = 1,
          regressors: Iterable[str] | None = None) -> AlignedTable:
    """Pair regressors at quarter ``t`` with the target at ``t + h``.

    Rows run over quarters inside the common date range whose ``t + h``
    target is observed; rows with any missing regressor are dropped and
    counted. The target series also enters as a regressor (its current
    value) when listed in ``regressors``; by default every series does.
    """
    if h < 1:
        raise ValueError("horizon must be at least one quarter")
    if target not in series:
        raise KeyError(f"target series {target!r} not supplied")
    cols = list(series) if regressors is None else list(regressors)
    data = {}
    for name in set(cols) | {target}:
        s = series[name]
        idx = s.index if isinstance(s.index, pd.PeriodIndex) else pd.PeriodIndex(
            [to_quarter(v) for v in s.index], freq="Q")
        data[name] = pd.Series(s.to_numpy(dtype=float), index=idx)
    starts = [s.dropna().index.min() for s in data.values() if s.notna().any()]
    ends = [s.dropna().index.max() for s in data.values() if s.notna().any()]
    if len(starts) < len(data) or max(starts) > min(ends):
        raise NoOverlap("the series share no common quarter")
    lo, hi = max(starts), min(ends)
    y = data[target].dropna()

    rows, index, dropped = [], [], 0
    for t in pd.period_range(lo, hi, freq="Q"):
        ahead = t + h
        if ahead not in y.index:
            continue
        vals = [data[c].get(t, math.nan) for c in cols]
        if any(v is None or not math.isfinite(v) for v in vals):
            dropped += 1
            continue
        rows.append(vals + [float(y[ahead])])
        index.append(t)
    if not rows:
        raise NoOverlap("no quarter has both regressors and the shifted target")
    frame = pd.DataFrame(rows, index=pd.PeriodIndex(index, freq="Q"), columns=cols + ["y_ahead"])
    frame.index.name = "quarter"
    return AlignedTable(frame, dropped, target, h)
