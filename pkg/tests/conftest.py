import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spdsignal.spd import BinnedDistribution, ClosedDistribution, close_open_bins

from oracles import WORKED_BINS, WORKED_PERCENT

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""
    def report(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        print(line)
        _ACCEPTANCE.append(line)
        assert ok, line
    return report


@pytest.fixture
def worked() -> ClosedDistribution:
    d = BinnedDistribution.from_bins(WORKED_BINS, np.array(WORKED_PERCENT) / 100)
    return close_open_bins(d)


@st.composite
def histograms(draw, max_bins=12, open_tails=True, min_positive=1):
    """Random survey-like histograms, optionally with open outer bins."""
    n = draw(st.integers(1, max_bins))
    start = draw(st.floats(-5, 5, allow_nan=False))
    widths = draw(st.lists(st.floats(0.05, 2.0), min_size=n, max_size=n))
    probs = draw(st.lists(st.integers(0, 40), min_size=n, max_size=n))
    if sum(p > 0 for p in probs) < min_positive:
        probs[draw(st.integers(0, n - 1))] = draw(st.integers(1, 40))
    edges = start + np.concatenate([[0.0], np.cumsum(widths)])
    if open_tails and n >= 3:
        if draw(st.booleans()):
            edges[0] = -np.inf
        if draw(st.booleans()):
            edges[-1] = np.inf
    return BinnedDistribution(edges, np.array(probs, dtype=float))


@st.composite
def closed_histograms(draw, **kw):
    return close_open_bins(draw(histograms(**kw)))


def quantiles_unique(d, levels, tol=1e-9) -> bool:
    """True when every level in ``levels`` has a single quantile.

    A level that the CDF reaches exactly at the start of a zero-mass bin has
    a whole interval of quantiles; the lower end is reported, which breaks
    reflection symmetry. The upper end is the reflected lower end.
    """
    from spdsignal import spd

    levels = np.asarray(levels, dtype=float)
    lower = spd.quantile(d, levels)
    upper = -spd.quantile(d.reflect(0.0), 1.0 - levels)
    return bool(np.all(np.abs(upper - lower) <= tol * np.maximum(1.0, np.abs(lower))))


def random_histogram(rng, max_bins=12, unique_max=False):
    """numpy counterpart of :func:`histograms` for fixed-count sweeps."""
    while True:
        n = int(rng.integers(2, max_bins + 1))
        widths = rng.choice([0.25, 0.5, 1.0], size=n) if rng.random() < 0.5 else rng.uniform(0.05, 2, n)
        edges = rng.uniform(-5, 5) + np.concatenate([[0.0], np.cumsum(widths)])
        probs = rng.integers(0, 40, size=n).astype(float)
        if rng.random() < 0.3:
            probs = np.round(rng.dirichlet(np.ones(n)) * 100)
        if probs.sum() == 0:
            continue
        if unique_max and np.sum(probs == probs.max()) > 1:
            continue
        if n >= 3 and rng.random() < 0.3:
            edges[0] = -np.inf
        if n >= 3 and rng.random() < 0.3:
            edges[-1] = np.inf
        return close_open_bins(BinnedDistribution(edges, probs))
