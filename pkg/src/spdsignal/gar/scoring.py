"""Log score and CRPS of a skew-t predictive distribution.

Both are oriented so that lower is better: the log score is
``-log f(y)`` and the CRPS is ``integral (F(x) - 1{x >= y})**2 dx``.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .skewt import SkewTParams, skewt_logpdf, standard

LS_CAP = 1e3
CRPS_K = 12.0
CRPS_STEP = 0.002


def log_score_detail(params: SkewTParams, realized: float, cap: float = LS_CAP) -> tuple[float, bool]:
    """``(score, capped)``; ``capped`` is True when the density underflowed."""
    lp = skewt_logpdf(params, realized)
    if not math.isfinite(lp) or -lp > cap:
        return float(cap), True
    return float(-lp), False


def log_score(params: SkewTParams, realized: float, cap: float = LS_CAP) -> float:
    return log_score_detail(params, realized, cap)[0]


def _trapezoid_crps(x: np.ndarray, F: np.ndarray, y: float) -> float:
    # x sorted and contains y exactly
    below = x <= y
    above = x >= y
    total = 0.0
    if below.sum() > 1:
        total += np.trapezoid(F[below] ** 2, x[below])
    if above.sum() > 1:
        total += np.trapezoid((1.0 - F[above]) ** 2, x[above])
    return float(total)


def crps_from_cdf(cdf: Callable, realized: float, lower: float, upper: float, n: int = 20001) -> float:
    """Trapezoidal CRPS for any CDF supported (up to negligible mass) on ``[lower, upper]``."""
    lo, hi = min(lower, realized), max(upper, realized)
    x = np.union1d(np.linspace(lo, hi, n), [realized])
    F = np.asarray(cdf(x), dtype=float)
    return _trapezoid_crps(x, F, realized)


def _extension(edge: float, far: float, n: int = 200) -> np.ndarray:
    # geometric spacing away from the window edge, suited to power-law tails
    dist = abs(far - edge)
    d = np.geomspace(min(0.01, dist), dist, n)
    return edge + np.sign(far - edge) * d


def crps(params: SkewTParams, realized: float, k: float = CRPS_K, step: float = CRPS_STEP) -> float:
    """CRPS by trapezoidal quadrature.

    The grid covers ``location +- k * scale`` in steps of ``step * scale``
    (extended geometrically out to ``realized`` when it falls outside).
    The CDF on the grid comes from the tabulated skew-t. Beyond the grid the skew-t tails behave like ``|z|**-dof``,
    which gives the closed-form remainders ``F(a)**2 |a| / (2 dof - 1)``
    and ``(1 - F(b))**2 b / (2 dof - 1)``.
    """
    eng = standard(params.shape, params.dof)
    zy = (realized - params.location) / params.scale
    n = int(round(2 * k / step)) + 1
    parts = [np.linspace(-k, k, n), [zy]]
    if zy < -k:
        parts.append(_extension(-k, zy))
    elif zy > k:
        parts.append(_extension(k, zy))
    z = np.unique(np.concatenate(parts))

    F = eng.cdf(z)

    inner = _trapezoid_crps(z, F, zy)
    tail_lo = F[0] ** 2 * abs(z[0]) / (2 * params.dof - 1)
    tail_hi = (1.0 - F[-1]) ** 2 * abs(z[-1]) / (2 * params.dof - 1)
    return float(params.scale * (inner + tail_lo + tail_hi))
