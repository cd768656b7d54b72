"""Linear quantile regression by exact linear programming.

The check-loss problem ``min_b sum rho_tau(y - X b)`` is written as the
standard LP with split residuals ``u+ - u- = y - X b`` and handed to HiGHS.
The LP optimum is then snapped onto an exact vertex: ``p`` observations
with (numerically) zero residual are re-solved as a square system, so an
intercept-only median fit returns an observed ``y`` value bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import optimize

from ..errors import LayoutMismatch, NumericalFailure, RankDeficient

RANK_TOL = 1e-10


def pinball_loss(y, X, beta, tau: float) -> float:
    r = np.asarray(y, dtype=float) - np.asarray(X, dtype=float) @ np.asarray(beta, dtype=float)
    return float(np.sum(np.where(r >= 0, tau * r, (tau - 1.0) * r)))


@dataclass(frozen=True)
class QuantileFit:
    tau: float
    coefficients: np.ndarray
    loss: float


def _check_rank(X: np.ndarray) -> None:
    sv = np.linalg.svd(X, compute_uv=False)
    if sv.size == 0 or sv[-1] <= RANK_TOL * max(sv[0], 1.0):
        raise RankDeficient("regressor matrix has (nearly) collinear columns")


def _snap_to_vertex(y, X, beta, tau, loss):
    n, p = X.shape
    order = np.argsort(np.abs(y - X @ beta), kind="stable")
    rows: list[int] = []
    for i in order:
        cand = rows + [int(i)]
        if np.linalg.matrix_rank(X[cand], tol=RANK_TOL) == len(cand):
            rows = cand
            if len(rows) == p:
                break
    if len(rows) < p:
        return beta, loss
    vertex = np.linalg.solve(X[rows], y[rows])
    vloss = pinball_loss(y, X, vertex, tau)
    if vloss <= loss + 1e-12 * max(1.0, abs(loss)):
        return vertex, vloss
    return beta, loss


def fit_quantile(y, X, tau: float) -> QuantileFit:
    """Check-loss minimizer for one ``tau``.

    Parameters
    ----------
    y : (n,) response
    X : (n, p) regressors, intercept column included by the caller
    tau : quantile level in (0, 1)
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if y.shape != (n,):
        raise LayoutMismatch(f"y has {y.size} rows but X has {n}")
    if n < p + 1:
        raise RankDeficient(f"need at least {p + 1} observations for {p} coefficients, got {n}")
    _check_rank(X)

    c = np.concatenate([np.zeros(p), np.full(n, tau), np.full(n, 1.0 - tau)])
    A_eq = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * p + [(0, None)] * (2 * n)
    res = optimize.linprog(c, A_eq=A_eq, b_eq=y, bounds=bounds, method="highs")
    if res.status != 0:
        raise NumericalFailure(f"quantile LP failed: {res.message}")
    beta = np.asarray(res.x[:p])
    beta, loss = _snap_to_vertex(y, X, beta, tau, pinball_loss(y, X, beta, tau))
    beta = np.array(beta, dtype=float)
    beta.setflags(write=False)
    return QuantileFit(tau=float(tau), coefficients=beta, loss=float(loss))


def predict_quantiles(fits: Mapping[float, QuantileFit], x_row) -> tuple[dict[float, float], bool]:
    """Linear predictions per tau, rearranged to be monotone.

    Returns ``(predictions, crossed)``; ``crossed`` is True when the raw
    predictions were not non-decreasing in tau and had to be sorted.
    """
    x = np.asarray(x_row, dtype=float).ravel()
    taus = sorted(fits)
    raw = []
    for t in taus:
        coef = fits[t].coefficients
        if coef.shape != x.shape:
            raise LayoutMismatch(
                f"fit for tau={t} has {coef.size} coefficients but the row has {x.size} regressors"
            )
        raw.append(float(coef @ x))
    raw = np.array(raw)
    crossed = bool(np.any(np.diff(raw) < 0))
    out = np.sort(raw) if crossed else raw
    return dict(zip(taus, out.tolist())), crossed
