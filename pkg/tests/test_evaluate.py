import numpy as np
import pandas as pd
import pytest

from spdsignal.errors import ConfigError, InsufficientHistory, LayoutMismatch
from spdsignal.gar.evaluate import (
    INTERCEPT_ONLY,
    MODEL_GRID,
    REGRESSORS,
    EvalConfig,
    ModelSpec,
    _strictly_increasing,
    evaluate_model,
    evaluate_models,
    results_frame,
    trace_frame,
)
from spdsignal.gar.synthetic import LinearQuantileProcess

SMALL = EvalConfig(min_eval_periods=8)


@pytest.fixture(scope="module")
def data():
    return LinearQuantileProcess().sample(30, seed=11, columns=("GDP", "NFCI"))


@pytest.fixture(scope="module")
def gdp_result(data):
    return evaluate_model(data, ModelSpec("GDP only", ("GDP",)), config=SMALL)


def test_grid_covers_every_subset_once():
    assert len(MODEL_GRID) == 15
    assert len({frozenset(m.regressors) for m in MODEL_GRID}) == 15
    assert MODEL_GRID[1].regressors == ("NFCI",)
    assert MODEL_GRID[9].regressors == ("GDP", "NFCI", "SSI")
    assert MODEL_GRID[14].regressors == REGRESSORS
    assert INTERCEPT_ONLY.label == "intercept"


def test_config_validation():
    for kw in [dict(scheme="recursive"), dict(initial_fraction=1.0), dict(window=1)]:
        with pytest.raises(ConfigError):
            EvalConfig(**kw)


def test_trace_layout(gdp_result):
    t = gdp_result.trace
    assert list(t.columns) == [
        "origin", "target_quarter", "n_train", "realized", "q05", "q25", "q75", "q95",
        "location", "scale", "shape", "dof", "fit_residual", "log_score", "crps",
        "crossed", "tied", "ls_capped",
    ]
    assert gdp_result.n_periods == 12 and len(gdp_result.params) == 12
    assert t["origin"].iloc[0] == "2003Q3" and t["target_quarter"].iloc[0] == "2003Q4"
    assert np.all(np.diff(t[["q05", "q25", "q75", "q95"]].to_numpy(), axis=1) > 0)
    assert gdp_result.avg_crps >= 0
    assert gdp_result.avg_crps == pytest.approx(t["crps"].mean())


def test_training_rows_are_realized_before_origin(data, gdp_result):
    # with h = 1 every earlier row is usable; with h = 2 the newest one is not
    assert gdp_result.trace["n_train"].tolist() == list(range(18, 30))
    two = evaluate_model(data, ModelSpec("GDP only", ("GDP",)), h=2, config=SMALL)
    assert two.trace["n_train"].tolist() == list(range(17, 29))


def test_rolling_window_length(data):
    res = evaluate_model(data, INTERCEPT_ONLY, config=EvalConfig("rolling", window=10, min_eval_periods=8))
    assert set(res.trace["n_train"]) == {10}


def test_deterministic_and_duplicate_models_agree(data, gdp_result):
    again = evaluate_model(data, ModelSpec("copy", ("GDP",)), config=SMALL)
    pd.testing.assert_frame_equal(again.trace, gdp_result.trace)
    assert again.avg_crps == gdp_result.avg_crps and again.avg_log_score == gdp_result.avg_log_score


def test_informative_covariate_wins(gdp_result, data):
    base = evaluate_model(data, INTERCEPT_ONLY, config=SMALL)
    assert gdp_result.avg_crps < base.avg_crps


def test_insufficient_history(data):
    with pytest.raises(InsufficientHistory):
        evaluate_model(data, INTERCEPT_ONLY)
    with pytest.raises(LayoutMismatch):
        evaluate_model(data, ModelSpec("x", ("SSI",)), config=SMALL)


def test_sorted_and_tabulated(data):
    models = [INTERCEPT_ONLY, ModelSpec("noise", ("NFCI",)), ModelSpec("GDP only", ("GDP",))]
    results = evaluate_models(data, config=SMALL, models=models)
    crps = [r.avg_crps for r in results]
    assert crps == sorted(crps)
    table = results_frame(results)
    assert list(table.columns) == ["model", "regressors", "avg_ls", "avg_crps", "n_periods", "crossing_count"]
    assert table["model"].iloc[0] == "GDP only"
    assert "" in table["regressors"].tolist()
    long = trace_frame(results)
    assert len(long) == 36 and long.columns[0] == "model"


def test_tied_quantiles_are_separated():
    q, tied = _strictly_increasing(np.array([1.0, 1.0, 2.0, 2.0]))
    assert tied and np.all(np.diff(q) > 0)
    assert q[1] - q[0] == pytest.approx(2e-6)
    same, tied = _strictly_increasing(np.array([1.0, 2.0, 3.0, 4.0]))
    assert not tied and same.tolist() == [1.0, 2.0, 3.0, 4.0]


def test_constant_outcome_is_scored_without_error():
    # identical outcomes collapse every predicted quantile onto one value
    frame = pd.DataFrame({"y_ahead": np.r_[np.full(20, 1.0), np.arange(10.0)]},
                         index=pd.period_range("2000Q1", periods=30, freq="Q"))
    res = evaluate_model(frame, INTERCEPT_ONLY, config=SMALL)
    assert res.trace["tied"].iloc[0]
    assert np.isfinite(res.avg_crps)
