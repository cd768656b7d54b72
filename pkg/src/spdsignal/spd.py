"""Binned subjective probability distributions.

A survey histogram is stored as ``n + 1`` bin edges and ``n`` bin masses.
Only the first edge may be ``-inf`` and only the last may be ``+inf``.
Everything downstream (moments, quantiles) works on a
:class:`ClosedDistribution`, obtained with :func:`close_open_bins`.

Within a bin, mass is spread uniformly, so the CDF is piecewise linear
and quantiles are found by linear interpolation inside the first bin whose
cumulative probability reaches ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptyDistribution,
    NegativeProbability,
    NoClosedNeighbor,
    NonContiguousBins,
    ZeroMass,
)

_CONTIGUITY_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BinnedDistribution:
    """One forecaster's histogram: ``edges`` (n+1) and ``probs`` (n)."""

    edges: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        edges = _frozen(self.edges)
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise EmptyDistribution("distribution has no bins")
        if edges.shape != (probs.size + 1,):
            raise NonContiguousBins(
                f"expected {probs.size + 1} edges for {probs.size} bins, got {edges.size}"
            )
        if np.any(np.isnan(edges)) or np.any(~np.isfinite(probs)):
            raise NonContiguousBins("bin edges and probabilities must not be NaN")
        if np.any(np.isinf(edges[1:-1])) or edges[0] == np.inf or edges[-1] == -np.inf:
            raise NonContiguousBins("only the outermost edges may be open")
        if not np.all(np.diff(edges) > 0):
            raise NonContiguousBins("bin edges must be strictly increasing")
        if np.any(probs < 0):
            raise NegativeProbability(f"negative probability in {probs.tolist()}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_bins(cls, bins: Sequence[tuple[float, float]], probs: Sequence[float]):
        """Build from ``(lower, upper)`` pairs; ``None`` marks an open side."""
        if len(bins) == 0:
            raise EmptyDistribution("distribution has no bins")
        if len(bins) != len(probs):
            raise NonContiguousBins(f"{len(bins)} bins but {len(probs)} probabilities")
        lows = [-math.inf if lo is None else float(lo) for lo, _ in bins]
        highs = [math.inf if hi is None else float(hi) for _, hi in bins]
        for i in range(len(bins) - 1):
            a, b = highs[i], lows[i + 1]
            if not (math.isfinite(a) and math.isfinite(b)) or abs(a - b) > _CONTIGUITY_TOL:
                raise NonContiguousBins(
                    f"bin {i} ends at {highs[i]} but bin {i + 1} starts at {lows[i + 1]}"
                )
        return cls(np.array(lows + [highs[-1]]), np.asarray(probs, dtype=float))

    @property
    def n_bins(self) -> int:
        return self.probs.size

    @property
    def bins(self) -> list[tuple[float, float]]:
        return list(zip(self.edges[:-1].tolist(), self.edges[1:].tolist()))

    @property
    def open_lower(self) -> bool:
        return bool(np.isinf(self.edges[0]))

    @property
    def open_upper(self) -> bool:
        return bool(np.isinf(self.edges[-1]))

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def shift(self, c: float):
        return type(self)(self.edges + c, self.probs)


@dataclass(frozen=True, eq=False)
class ClosedDistribution(BinnedDistribution):
    """A normalized distribution with finite edges.

    ``open_lower_mass`` / ``open_upper_mass`` keep the mass that sat in an
    open tail bin before it was closed (``nan`` if that tail was closed to
    begin with); the extreme-tail Bowley rule reads them.
    """

    open_lower_mass: float = math.nan
    open_upper_mass: float = math.nan
    cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        if not np.all(np.isfinite(self.edges)):
            raise NonContiguousBins("closed distribution has an open edge")
        total = self.probs.sum()
        if total <= 0:
            raise ZeroMass("distribution has zero total mass")
        if abs(total - 1.0) > 1e-9:
            raise ZeroMass(f"closed distribution must be normalized, total={total!r}")
        cum = np.concatenate([[0.0], np.cumsum(self.probs)])
        cum[-1] = 1.0
        # keep the tail flat once all mass has been placed
        cum = np.minimum(cum, 1.0)
        object.__setattr__(self, "cum", _frozen(cum))

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def shift(self, c: float):
        return ClosedDistribution(
            self.edges + c, self.probs, self.open_lower_mass, self.open_upper_mass
        )

    def scale(self, s: float):
        if s <= 0:
            raise ValueError("scale factor must be positive")
        return ClosedDistribution(
            self.edges * s, self.probs, self.open_lower_mass, self.open_upper_mass
        )

    def reflect(self, about: float = 0.0):
        """Mirror image about ``about``; open-tail masses swap sides."""
        return ClosedDistribution(
            (2 * about - self.edges)[::-1],
            self.probs[::-1],
            self.open_upper_mass,
            self.open_lower_mass,
        )


@dataclass(frozen=True)
class TailPolicy:
    """How to give open tail bins a finite edge.

    ``width=None`` copies the width of the adjacent closed bin; a number
    fixes the width of both closed-off tails.
    """

    width: float | None = None

    def __post_init__(self):
        if self.width is not None and not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"tail width must be positive and finite, got {self.width}")


def normalize(d: BinnedDistribution) -> BinnedDistribution:
    """Rescale probabilities to sum to one; edges are untouched."""
    total = d.probs.sum()
    if total <= 0:
        raise ZeroMass("cannot normalize a distribution with zero total mass")
    # already-normalized input is a fixed point (keeps the operation idempotent)
    if isinstance(d, ClosedDistribution) or abs(total - 1.0) <= 1e-12:
        return d
    return BinnedDistribution(d.edges, d.probs / total)


def close_open_bins(d: BinnedDistribution, policy: TailPolicy = TailPolicy()) -> ClosedDistribution:
    if isinstance(d, ClosedDistribution):
        return d
    d = normalize(d)
    edges = np.array(d.edges)
    lower_mass = upper_mass = math.nan
    if d.open_lower or d.open_upper:
        if d.n_bins < 2:
            raise NoClosedNeighbor("an open bin needs a closed neighbour to copy its width")
    if d.open_lower:
        if policy.width is None:
            if d.n_bins == 2 and d.open_upper:
                raise NoClosedNeighbor("both bins are open; no closed neighbour")
            w = edges[2] - edges[1]
        else:
            w = policy.width
        edges[0] = edges[1] - w
        lower_mass = float(d.probs[0])
    if d.open_upper:
        if policy.width is None:
            if d.n_bins == 2 and d.open_lower:
                raise NoClosedNeighbor("both bins are open; no closed neighbour")
            w = edges[-2] - edges[-3]
        else:
            w = policy.width
        edges[-1] = edges[-2] + w
        upper_mass = float(d.probs[-1])
    return ClosedDistribution(edges, d.probs, lower_mass, upper_mass)


def _first_bin_reaching(d: ClosedDistribution, p):
    # index i (0-based) of the first bin with cum[i + 1] >= p
    idx = np.searchsorted(d.cum[1:], p, side="left")
    return np.minimum(idx, d.n_bins - 1)


def quantile(d: ClosedDistribution, p):
    """Value below which a fraction ``p`` of the mass lies.

    Accepts a scalar or an array of probabilities in ``(0, 1)``.
    """
    if d.n_bins == 0:
        raise EmptyDistribution("distribution has no bins")
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)):
        raise ValueError(f"quantile level must lie strictly in (0, 1), got {p}")
    i = _first_bin_reaching(d, p_arr)
    lo_cum = d.cum[i]
    mass = d.cum[i + 1] - lo_cum
    a = d.edges[i]
    b = d.edges[i + 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(mass > 0, (p_arr - lo_cum) / mass, 0.0)
    out = a + np.clip(frac, 0.0, 1.0) * (b - a)
    return float(out) if out.ndim == 0 else out


def cdf(d: ClosedDistribution, x):
    """Piecewise-linear CDF, 0 below the support and 1 above it."""
    x_arr = np.asarray(x, dtype=float)
    out = np.interp(x_arr, d.edges, d.cum, left=0.0, right=1.0)
    return float(out) if out.ndim == 0 else out
