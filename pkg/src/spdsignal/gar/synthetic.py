"""Synthetic data with known conditional quantiles.

The covariate follows a Gaussian AR(1) with unit variance and the outcome
``y_{t+h} = intercept + slope * x_t + noise * e_{t+h}`` with i.i.d.
standard normal ``e``, so every conditional quantile is linear in ``x_t``
with the same slope.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats


@dataclass(frozen=True)
class LinearQuantileProcess:
    intercept: float = 2.0
    slope: float = 1.0
    noise: float = 1.0
    persistence: float = 0.5
    start: str = "1999Q1"

    def true_quantile(self, x, tau: float):
        return self.intercept + self.slope * np.asarray(x) + self.noise * stats.norm.ppf(tau)

    def sample(self, n: int, seed: int, columns: tuple[str, ...] = ("x",)) -> pd.DataFrame:
        """``n`` aligned rows: the covariate at ``t`` and ``y_ahead`` at ``t + 1``.

        Extra names in ``columns`` get independent AR(1) series that carry
        no information about the outcome.
        """
        rng = np.random.default_rng(seed)
        phi = self.persistence
        data = {}
        for name in columns:
            x = np.empty(n)
            x[0] = rng.standard_normal()
            shocks = rng.standard_normal(n) * np.sqrt(1 - phi * phi)
            for t in range(1, n):
                x[t] = phi * x[t - 1] + shocks[t]
            data[name] = x
        data["y_ahead"] = (self.intercept + self.slope * data[columns[0]]
                           + self.noise * rng.standard_normal(n))
        index = pd.period_range(self.start, periods=n, freq="Q", name="quarter")
        return pd.DataFrame(data, index=index)
