"""Regenerate the bundled synthetic dataset in ``src/spdsignal/data``.

The survey panel mimics quarterly inflation-expectation histograms: 15
forecasters answer most rounds with integer-percent probabilities over
half-point bins from -1 to 4 with open tails. Each answer is a split-normal
whose mode follows a common expectation drift plus a forecaster bias, and
whose asymmetry follows a common risk tilt. GDP growth responds to lagged
financial stress and to the risk tilt; the financial-conditions index is
published daily.

Usage: python scripts/make_synthetic_data.py [--seed N] [--out DIR]
"""
from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

EDGES = np.arange(-1.0, 4.01, 0.5)
START, END = "2004Q1", "2024Q4"
N_FORECASTERS = 15


def ar1(rng, n, phi, sd, x0=0.0):
    x = np.empty(n)
    prev = x0
    for t in range(n):
        prev = phi * prev + sd * rng.standard_normal()
        x[t] = prev
    return x


def split_normal_cdf(x, mode, sd_left, sd_right):
    x = np.asarray(x, dtype=float)
    w_left = sd_left / (sd_left + sd_right)
    below = 2 * w_left * stats.norm.cdf(x, mode, sd_left)
    above = w_left + 2 * (1 - w_left) * (stats.norm.cdf(x, mode, sd_right) - 0.5)
    return np.where(x <= mode, below, above)


def integer_percent(probs):
    pct = np.floor(100 * probs).astype(int)
    # hand the rounding remainder to the bins that lost the most
    short = 100 - pct.sum()
    order = np.argsort(-(100 * probs - pct), kind="stable")
    pct[order[:short]] += 1
    return pct


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "src/spdsignal/data")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    quarters = pd.period_range(START, END, freq="Q")
    n = len(quarters)
    stress = ar1(rng, n + 1, 0.8, 0.6)
    drift = ar1(rng, n, 0.9, 0.12)
    tilt = -0.4 * stress[:n] + ar1(rng, n, 0.7, 0.25)

    bias = rng.normal(0, 0.15, N_FORECASTERS)
    skew_habit = rng.normal(0, 0.15, N_FORECASTERS)
    with (out / "spd_panel.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["forecaster_id", "round", "horizon", "variable", "bin_lower", "bin_upper", "prob_percent"])
        for t, q in enumerate(quarters):
            round_date = q.start_time.strftime("%Y-%m-%d")
            for i in range(N_FORECASTERS):
                if rng.random() < 0.1:
                    continue
                mode = 2.0 + drift[t] + bias[i] + rng.normal(0, 0.1)
                k = tilt[t] + skew_habit[i] + rng.normal(0, 0.15)
                sd = 0.55 * np.exp(rng.normal(0, 0.1))
                cdf = split_normal_cdf(EDGES, mode, sd * np.exp(-k / 2), sd * np.exp(k / 2))
                probs = np.diff(np.concatenate([[0.0], cdf, [1.0]]))
                pct = integer_percent(probs)
                lowers = [""] + [f"{e:g}" for e in EDGES]
                uppers = [f"{e:g}" for e in EDGES] + [""]
                for lo, hi, p in zip(lowers, uppers, pct):
                    w.writerow([f"F{i + 1:02d}", round_date, "1y", "inflation", lo, hi, int(p)])

    # growth responds to last quarter's stress and to the risk tilt; bad
    # stress states widen the left tail
    growth = np.empty(n)
    growth[0] = 0.4
    for t in range(1, n):
        downside = 0.4 * max(stress[t - 1], 0.0)
        shock = rng.standard_normal()
        scale = 0.45 + (downside if shock < 0 else 0.0)
        growth[t] = 0.25 + 0.3 * growth[t - 1] - 0.25 * stress[t - 1] + 0.3 * tilt[t - 1] + scale * shock
    pd.DataFrame({"date": [q.start_time.strftime("%Y-%m-%d") for q in quarters],
                  "gdp_growth": np.round(growth, 4)}).to_csv(out / "gdp.csv", index=False, lineterminator="\n")

    days = pd.bdate_range(quarters[0].start_time, quarters[-1].end_time.normalize())
    day_q = days.to_period("Q")
    level = np.array([stress[quarters.get_loc(p)] for p in day_q])
    # daily path drifts towards the quarterly state with small noise
    noise = ar1(rng, len(days), 0.95, 0.03)
    pd.DataFrame({"date": days.strftime("%Y-%m-%d"), "nfci": np.round(level + noise, 4)}).to_csv(
        out / "nfci.csv", index=False, lineterminator="\n")

    (out / "replicate.toml").write_text(
        "# bundled synthetic replication; paths are relative to this file\n"
        'spd_path = "spd_panel.csv"\n'
        'gdp_path = "gdp.csv"\n'
        'nfci_path = "nfci.csv"\n'
        "target = 2.0\n"
        'spd_horizon = "1y"\n'
        'variable = "inflation"\n'
        'nfci_aggregate = "last"\n'
        "horizon = 1\n"
        'eval_scheme = "expanding"\n'
        "initial_fraction = 0.6\n"
        "seed = 0\n"
    )
    print(f"wrote synthetic dataset to {out}")


if __name__ == "__main__":
    main()
