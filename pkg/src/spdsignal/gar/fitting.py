"""Exactly-identified skew-t fit to four predicted quantiles.

Minimizes ``sum_tau (q_tau - F^{-1}(tau; theta))**2`` over the four skew-t
parameters. Location and scale enter the quantiles linearly, so for a given
``(shape, dof)`` they are solved in closed form and the search only runs
over the two shape parameters (variable projection). The search uses
``delta = shape / sqrt(1 + shape**2)`` and ``1 / dof`` as coordinates,
which keeps both bounded and roughly linear in the quantile ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy import optimize

from ..errors import ConvergenceFailure, NonIncreasingQuantiles, NumericalFailure
from .skewt import SkewTParams, StandardSkewT, standard

TAUS = (0.05, 0.25, 0.75, 0.95)


@dataclass(frozen=True)
class SkewTBox:
    """Search box for the shape parameters; dof capped to stabilize the normal limit."""

    shape: tuple[float, float] = (-10.0, 10.0)
    dof: tuple[float, float] = (2.0, 100.0)

    def __post_init__(self):
        if not (self.shape[0] < self.shape[1]):
            raise ValueError("shape bounds must be increasing")
        if not (1.0 < self.dof[0] < self.dof[1]):
            raise ValueError("dof bounds must satisfy 1 < low < high")

    @property
    def lower(self) -> np.ndarray:
        return np.array([_delta(self.shape[0]), 1.0 / self.dof[1]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([_delta(self.shape[1]), 1.0 / self.dof[0]])


@dataclass(frozen=True)
class SkewTFit:
    params: SkewTParams
    residual: float
    converged: bool
    n_starts: int


def _delta(shape: float) -> float:
    return shape / math.sqrt(1.0 + shape * shape)


def _shape(delta: float) -> float:
    delta = min(max(delta, -1 + 1e-15), 1 - 1e-15)
    return delta / math.sqrt(1.0 - delta * delta)


def _std_quantiles(x, taus) -> np.ndarray:
    return StandardSkewT(_shape(x[0]), 1.0 / x[1]).quantile(np.asarray(taus))


def _project(z: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    zc = z - z.mean()
    scale = float(np.dot(zc, q - q.mean()) / np.dot(zc, zc))
    loc = float(q.mean() - scale * z.mean())
    return loc, scale


@lru_cache(maxsize=16)
def _start_table(box: SkewTBox, taus: tuple):
    lo, hi = box.lower, box.upper
    deltas = np.unique(np.concatenate([np.linspace(lo[0], hi[0], 21), [0.0]]))
    deltas = deltas[(deltas >= lo[0]) & (deltas <= hi[0])]
    kappas = np.linspace(lo[1], hi[1], 8)
    pts, feats = [], []
    for d in deltas:
        for k in kappas:
            z = _std_quantiles((d, k), taus)
            pts.append((d, k))
            feats.append(_features(z))
    return np.array(pts), np.array(feats)


def _features(q: np.ndarray) -> np.ndarray:
    # location/scale-free description of the quantile set
    iqr = q[2] - q[1]
    return np.array([(q[1] - q[0]) / iqr, (q[3] - q[2]) / iqr])


def fit_skewt_to_quantiles(
    q: Mapping[float, float],
    box: SkewTBox = SkewTBox(),
    seed: int = 0,
    tol: float = 1e-14,
    n_random: int = 4,
    strict: bool = False,
    warm_start: SkewTParams | None = None,
) -> SkewTFit:
    """Fit skew-t parameters to quantiles ``{tau: value}``.

    Starts are ``warm_start`` (if given), the three table points whose
    quantile shape is closest to the target, then up to ``n_random`` seeded
    random points in the box. The search stops at the first start that
    reaches ``tol`` (on the residual scaled by the 5-95 range squared).
    Targets no skew-t can match exactly usually end on the box boundary;
    such a bound-constrained optimum, or two starts agreeing on the same
    residual, also ends the search. The reported ``residual`` is the
    unscaled sum of squares.
    With ``strict=True`` a fit above tolerance raises
    :class:`ConvergenceFailure` carrying the best parameters found.
    """
    taus = tuple(sorted(q))
    vals = np.array([q[t] for t in taus], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonIncreasingQuantiles("quantiles must be finite")
    if not np.all(np.diff(vals) > 0):
        raise NonIncreasingQuantiles(f"quantiles must increase strictly in tau, got {vals.tolist()}")
    span = vals[-1] - vals[0]
    target = (vals - vals[0]) / span

    def resid(x):
        z = _std_quantiles(x, taus)
        loc, scale = _project(z, target)
        return loc + scale * z - target

    pts, feats = _start_table(box, taus)
    order = np.argsort(np.sum((feats - _features(target)) ** 2, axis=1))
    starts = [pts[i] for i in order[:3]]
    if warm_start is not None:
        w = np.array([_delta(warm_start.shape), 1.0 / warm_start.dof])
        starts.insert(0, np.clip(w, box.lower, box.upper))
    rng = np.random.default_rng(seed)
    lo, hi = box.lower, box.upper

    best_x, best_cost, n_tried = None, math.inf, 0
    costs = []
    i = 0
    while i < len(starts) + n_random:
        x0 = starts[i] if i < len(starts) else rng.uniform(lo, hi)
        i += 1
        n_tried += 1
        try:
            sol = optimize.least_squares(
                resid, x0, bounds=(lo, hi), method="trf", x_scale=(1.0, 0.1),
                diff_step=1e-7, xtol=1e-12, ftol=1e-15, gtol=1e-15, max_nfev=300,
            )
        except (ValueError, NumericalFailure):
            continue
        cost = float(np.sum(sol.fun**2))
        costs.append(cost)
        if cost < best_cost:
            best_x, best_cost = sol.x, cost
        if best_cost <= tol:
            break
        if cost <= best_cost and np.any(sol.active_mask != 0):
            break
        # an unattainable target: stop once two starts land on the same optimum
        if sum(c <= best_cost * (1 + 1e-8) + 1e-16 for c in costs) >= 2:
            break
    if best_x is None:
        raise ConvergenceFailure("skew-t fit failed from every start")

    shape, dof = _shape(float(best_x[0])), 1.0 / float(best_x[1])
    z = standard(shape, dof).quantile(np.asarray(taus))
    loc, scale = _project(z, vals)
    params = SkewTParams(loc, scale, shape, dof)
    residual = float(np.sum((loc + scale * z - vals) ** 2))
    converged = best_cost <= tol
    if strict and not converged:
        raise ConvergenceFailure(
            f"skew-t fit residual {residual:.3g} above tolerance", best=params, residual=residual
        )
    return SkewTFit(params, residual, converged, n_tried)
