"""Acceptance criteria, one test each, at their stated tolerances.

Every test reports one PASS/FAIL line through the ``criterion`` fixture;
the lines are repeated in the terminal summary.
"""
import filecmp
import math
import time

import numpy as np
import pytest
from scipy import stats

from spdsignal import cli
from spdsignal import moments as M
from spdsignal import spd
from spdsignal.gar.evaluate import INTERCEPT_ONLY, EvalConfig, ModelSpec, evaluate_model
from spdsignal.gar.fitting import TAUS, fit_skewt_to_quantiles
from spdsignal.gar.quantreg import fit_quantile
from spdsignal.gar.scoring import crps, crps_from_cdf
from spdsignal.gar.skewt import SkewTParams, skewt_cdf, skewt_pdf, skewt_quantile
from spdsignal.gar.synthetic import LinearQuantileProcess
from spdsignal.ingest import parse_spd_csv
from spdsignal.moments import compute_moments
from spdsignal.signal import ssi_value
from spdsignal.spd import BinnedDistribution, close_open_bins

from conftest import quantiles_unique, random_histogram
from oracles import (
    WORKED_BINS,
    WORKED_PERCENT,
    histogram_quantile,
    normal_octile_kurtosis,
    quantreg_bruteforce,
)


def test_worked_example(tmp_path, criterion):
    t0 = time.perf_counter()
    rows = "".join(f"45,2024-06-01,1y,inflation,{lo},{hi},{p}\n"
                   for (lo, hi), p in zip(WORKED_BINS, WORKED_PERCENT))
    path = tmp_path / "worked.csv"
    path.write_text("forecaster_id,round,horizon,variable,bin_lower,bin_upper,prob_percent\n" + rows)
    d = close_open_bins(parse_spd_csv(path).records[0].dist)
    q1, q2, q3 = (spd.quantile(d, p) for p in (0.25, 0.5, 0.75))
    o2, o3 = (histogram_quantile(d.edges, d.probs, p) for p in (0.5, 0.75))
    oq1 = histogram_quantile(d.edges, d.probs, 0.25)
    bowley_oracle = ((o3 - o2) - (o2 - oq1)) / (o3 - oq1)
    bowley = M.bowley_skewness(d)
    elapsed = time.perf_counter() - t0
    ok = (
        q1 == pytest.approx(-0.7, abs=1e-15)
        and abs(q2 - o2) <= 1e-9 and abs(q3 - o3) <= 1e-9
        and abs(bowley - bowley_oracle) <= 1e-6
        and abs(bowley - (-0.0357)) < 1e-4
        and elapsed < 1.0
    )
    criterion("worked example quartiles and Bowley", ok,
              f"Q1={q1:.15g} Q2={q2:.10f} Q3={q3:.10f} bowley={bowley:.10f} {elapsed:.3f}s")


def _moment_property_failures(d, rng):
    m = compute_moments(d, include_kelly=True)
    c, s = rng.uniform(-20, 20), rng.uniform(0.1, 10)
    shifted = compute_moments(d.shift(c), include_kelly=True)
    scaled = compute_moments(d.scale(s), include_kelly=True)
    reflected = compute_moments(d.reflect(0.0), include_kelly=True)
    bad = []

    def close(a, b, tol=1e-7):
        return (math.isnan(a) and math.isnan(b)) or abs(a - b) <= tol * max(1.0, abs(b))

    for name in ("mean", "median", "mode"):
        if not close(getattr(shifted, name), getattr(m, name) + c):
            bad.append(f"location {name}")
        if not close(getattr(scaled, name), getattr(m, name) * s):
            bad.append(f"scale {name}")
    for name in ("bowley", "kelly", "moors_kurtosis"):
        if not (close(getattr(shifted, name), getattr(m, name))
                and close(getattr(scaled, name), getattr(m, name))):
            bad.append(f"invariance {name}")
    # antisymmetry needs point-valued quantiles; see quantiles_unique
    if quantiles_unique(d, (0.25, 0.5, 0.75)) and not close(reflected.bowley, -m.bowley):
        bad.append("reflection bowley")
    if quantiles_unique(d, (0.1, 0.5, 0.9)) and not close(reflected.kelly, -m.kelly):
        bad.append("reflection kelly")
    for v in (m.bowley, m.kelly):
        if not (math.isnan(v) or -1 - 1e-12 <= v <= 1 + 1e-12):
            bad.append("bounds")
    # mirror the histogram onto itself: mean, median and mode must all sit at
    # the centre. Mass next to the centre keeps the median unique.
    half = d.probs.copy()
    half[-1] = max(half[-1], 0.05)
    sym = np.concatenate([half, half[::-1]])
    w = np.diff(d.edges)
    edges = np.concatenate([[0.0], np.cumsum(np.concatenate([w, w[::-1]]))])
    centre = edges[-1] / 2
    ms = compute_moments(close_open_bins(BinnedDistribution(edges, sym)))
    for name in ("mean", "median"):
        if abs(getattr(ms, name) - centre) > 1e-9 * max(1.0, centre):
            bad.append(f"symmetric {name}")
    if not math.isnan(ms.mode) and abs(ms.mode - centre) > 1e-9 * max(1.0, centre):
        bad.append("symmetric mode")
    return bad


def test_moment_properties(criterion):
    rng = np.random.default_rng(20240101)
    t0 = time.perf_counter()
    failures = []
    for i in range(1000):
        d = random_histogram(rng)
        failures += [(i, f) for f in _moment_property_failures(d, rng)]
    elapsed = time.perf_counter() - t0
    criterion("moment property suite on 1000 histograms", not failures and elapsed < 10.0,
              f"{len(failures)} failures, {elapsed:.2f}s" + (f", first {failures[0]}" if failures else ""))


def test_moors_kurtosis(criterion):
    uniform = M.moors_kurtosis(close_open_bins(BinnedDistribution.from_bins([(3, 7)], [1])))
    edges = np.arange(-8, 8.0001, 0.01)
    normal = M.moors_kurtosis(close_open_bins(BinnedDistribution(edges, np.diff(stats.norm.cdf(edges)))))
    oracle = normal_octile_kurtosis()
    ok = uniform == 1.0 and abs(normal - oracle) <= 0.005 and abs(normal - 1.233) <= 0.005
    criterion("Moors kurtosis uniform and fine normal", ok,
              f"uniform={uniform!r} normal={normal:.6f} oracle={oracle:.6f}")


def test_ssi_algebra(criterion):
    t0 = time.perf_counter()
    grid = np.linspace(-1, 1, 41)
    bad = 0
    for qn in grid:
        for an in grid:
            # (a) no median deviation, no index
            for a_bar in (-0.4, 0.0, 0.4):
                bad += ssi_value(0.0, a_bar, qn, an) != 0.0
            # (b) opposite components of equal size cancel
            for q_bar in (-0.7, 0.3):
                bad += abs(ssi_value(q_bar, -q_bar, qn, -qn)) > 1e-15
            # (c) same-sign rounds keep the sign of q_bar and never exceed it
            for q_bar in (-0.9, -0.1, 0.2, 1.3):
                v = ssi_value(q_bar, 0.5 * np.sign(q_bar), qn, an)
                bad += not (abs(v) <= abs(q_bar) + 1e-15 and (v == 0 or np.sign(v) == np.sign(q_bar)))
    elapsed = time.perf_counter() - t0
    criterion("SSI algebra on a 41x41 grid", bad == 0 and elapsed < 1.0, f"{int(bad)} violations, {elapsed:.3f}s")


def test_quantile_regression(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    y = rng.normal(size=31)
    median_ok = fit_quantile(y, np.ones((31, 1)), 0.5).coefficients[0] == np.median(y)
    worst = 0.0
    for _ in range(200):
        x = rng.normal(size=25)
        yy = 1.0 + 0.5 * x + rng.standard_t(4, size=25)
        X = np.column_stack([np.ones(25), x])
        tau = float(rng.choice([0.05, 0.25, 0.5, 0.75, 0.95]))
        best, _ = quantreg_bruteforce(yy, X, tau)
        worst = max(worst, abs(fit_quantile(yy, X, tau).loss - best))
    elapsed = time.perf_counter() - t0
    criterion("quantile regression median and LP oracle", median_ok and worst <= 1e-6 and elapsed < 30,
              f"median exact={median_ok}, worst loss gap={worst:.2e}, {elapsed:.1f}s")


def test_skewt_round_trip(criterion):
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(100):
        p = SkewTParams(rng.uniform(-3, 3), rng.uniform(0.2, 5), rng.uniform(-10, 10), rng.uniform(2, 100))
        q = skewt_quantile(p, np.array(TAUS))
        fit = fit_skewt_to_quantiles(dict(zip(TAUS, q)))
        worst = max(worst, float(np.max(np.abs(skewt_quantile(fit.params, np.array(TAUS)) - q))))
    sym = SkewTParams(0.7, 1.3, 0.0, 5.0)
    d = np.linspace(0, 10, 41)
    sym_err = float(np.max(np.abs(skewt_pdf(sym, 0.7 + d) - skewt_pdf(sym, 0.7 - d))))
    xs = np.arange(-3.0, 3.5, 1.0)
    inv_err = max(
        float(np.max(np.abs(skewt_quantile(p, skewt_cdf(p, xs)) - xs)))
        for p in (SkewTParams(0, 1, 0, 5), SkewTParams(1, 2, 3, 6), SkewTParams(-0.5, 0.8, -4, 3))
    )
    ok = worst <= 1e-4 and sym_err <= 1e-10 and inv_err <= 1e-6
    criterion("skew-t round trip, symmetry and inversion", ok,
              f"worst quantile error={worst:.2e}, symmetry={sym_err:.1e}, inversion={inv_err:.1e}")


def test_scoring(criterion):
    uniform = crps_from_cdf(lambda x: np.clip(x, 0, 1), 0.5, 0.0, 1.0)
    worst_homog = 0.0
    for p, y in [(SkewTParams(0.5, 1.2, 2.0, 5.0), 1.7), (SkewTParams(-1, 0.6, -6.0, 3.0), -2.5),
                 (SkewTParams(0, 1, 0, 50), 0.2)]:
        base = crps(p, y)
        for s in (0.5, 2.0, 10.0):
            scaled = crps(SkewTParams(s * p.location, s * p.scale, p.shape, p.dof), s * y)
            worst_homog = max(worst_homog, abs(scaled - s * base))
    degenerate = max(abs(crps(SkewTParams(0.3, 1e-4, 2.0, 5.0), y) - abs(y - 0.3)) for y in (-1.0, 0.3, 2.5))
    ok = abs(uniform - 1 / 12) <= 1e-5 and worst_homog <= 1e-6 and degenerate <= 1e-3
    criterion("CRPS uniform, homogeneity and degenerate limit", ok,
              f"uniform={uniform:.8f}, homogeneity={worst_homog:.1e}, degenerate={degenerate:.1e}")


def test_synthetic_gar(criterion):
    process = LinearQuantileProcess()
    with_x = ModelSpec("covariate", ("x",))
    config = EvalConfig()
    t0 = time.perf_counter()
    wins = 0
    for seed in range(100):
        data = process.sample(56, seed=seed)
        a = evaluate_model(data, with_x, config=config).avg_crps
        b = evaluate_model(data, INTERCEPT_ONLY, config=config).avg_crps
        wins += a < b
    elapsed = time.perf_counter() - t0
    criterion("synthetic growth-at-risk covariate beats intercept", wins >= 95 and elapsed < 300,
              f"{wins}/100 wins, {elapsed:.0f}s")


def test_replicate_determinism(tmp_path, monkeypatch, criterion):
    monkeypatch.chdir(tmp_path)
    codes = [cli.main(["replicate", "--out", str(tmp_path / name)]) for name in ("a", "b")]
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    ok = codes == [0, 0] and not mismatch and not errors and "gar_results.csv" in match
    criterion("replicate is byte-identical across runs", ok,
              f"exit codes {codes}, {len(match)} identical files" + (f", differing {mismatch}" if mismatch else ""))
