import json
import os

import numpy as np
import pandas as pd
import pytest

from spdsignal import cli
from spdsignal.errors import NumericalFailure

from oracles import WORKED_BINS, WORKED_PERCENT

HEADER = "forecaster_id,round,horizon,variable,bin_lower,bin_upper,prob_percent\n"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("SPDSIGNAL_"):
            monkeypatch.delenv(key)


def _histogram_rows(fid, rnd, bins, percent):
    return "".join(f"{fid},{rnd},1y,inflation,{lo},{hi},{p}\n" for (lo, hi), p in zip(bins, percent))


def _setup(tmp_path, spd_text, extra=""):
    (tmp_path / "spd.csv").write_text(spd_text)
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'spd_path = "spd.csv"\ntarget = 2.0\n{extra}')
    return cfg


def _run(cfg, out, *commands):
    return [cli.main([c, "--config", str(cfg), "--out", str(out)]) for c in commands]


def _log(out):
    return [json.loads(line) for line in (out / "run.log").read_text().splitlines()]


def test_moments_on_worked_example(tmp_path):
    text = HEADER + _histogram_rows("45", "2024-06-01", WORKED_BINS, WORKED_PERCENT)
    out = tmp_path / "out"
    assert _run(_setup(tmp_path, text), out, "moments") == [0]
    table = pd.read_csv(out / "moments.csv")
    row = table.iloc[0]
    assert row["round"] == "2024Q2" and row["forecaster_id"] == 45
    assert row["median"] == pytest.approx(-2 / 7, abs=1e-11)
    assert row["bowley"] == pytest.approx(-1 / 28, abs=1e-9)
    assert row["mean"] == pytest.approx(-0.3, abs=1e-12)
    assert "flags" in table.columns
    # one histogram has no correlations; the command says so and carries on
    assert not (out / "moment_correlations.csv").exists()
    entries = _log(out)
    assert any(e["message"] == "skipped moment correlations" for e in entries)
    assert entries[0]["message"] == "start" and entries[-1]["message"] == "done"
    assert all("time" not in e and "asctime" not in e for e in entries)


def _two_rounds(shift=0.0):
    bins = [(0.0 + shift, 1.0 + shift), (1.0 + shift, 2.0 + shift), (2.0 + shift, 3.0 + shift)]
    rows = ""
    for rnd, percent in [("2024Q1", [20, 50, 30]), ("2024Q2", [30, 50, 20])]:
        for fid in ("A", "B"):
            rows += _histogram_rows(fid, rnd, bins, percent)
    return HEADER + rows


def test_signal_and_ssi(tmp_path):
    out = tmp_path / "out"
    assert _run(_setup(tmp_path, _two_rounds()), out, "signal", "ssi") == [0, 0]
    recs = pd.read_csv(out / "signal_records.csv")
    assert len(recs) == 4 and set(recs["signal_class"]) <= {"StrongUp", "WeakUp", "WeakDown", "StrongDown", "Neutral"}
    ssi = pd.read_csv(out / "ssi.csv")
    assert list(ssi.columns) == ["round", "q_bar", "a_bar", "q_norm", "a_norm", "ssi",
                                 "q_q1", "q_q3", "a_q1", "a_q3", "n"]
    assert ssi["round"].tolist() == ["2024Q1", "2024Q2"]
    shares = pd.read_csv(out / "signal_shares.csv").set_index("round")
    np.testing.assert_allclose(shares.sum(axis=1), 1.0)


def test_all_medians_at_target_give_zero_index(tmp_path):
    # symmetric histograms centred on the target: every median deviation is zero
    text = _two_rounds(shift=0.5)
    text = text.replace(",20\n", ",25\n").replace(",30\n", ",25\n")
    out = tmp_path / "out"
    assert _run(_setup(tmp_path, text), out, "ssi") == [0]
    assert (pd.read_csv(out / "ssi.csv")["ssi"] == 0).all()


def test_empty_panel_is_an_input_error(tmp_path, capsys):
    out = tmp_path / "out"
    assert _run(_setup(tmp_path, HEADER), out, "moments") == [1]
    assert "input error" in capsys.readouterr().err
    assert _log(out)[-1]["error"] == "InsufficientData"


def test_missing_config_key_for_gar(tmp_path):
    assert _run(_setup(tmp_path, _two_rounds()), tmp_path / "out", "gar") == [1]


def _macro(tmp_path, rounds):
    quarters = pd.period_range(rounds[0], rounds[-1], freq="Q")
    gdp = "date,value\n" + "".join(f"{q.start_time.date()},{1 + 0.1 * i}\n" for i, q in enumerate(quarters))
    nfci = "date,value\n" + "".join(f"{q.end_time.date()},{-0.1 * i}\n" for i, q in enumerate(quarters))
    (tmp_path / "gdp.csv").write_text(gdp)
    (tmp_path / "nfci.csv").write_text(nfci)
    return 'gdp_path = "gdp.csv"\nnfci_path = "nfci.csv"\n'


def test_short_sample_is_an_input_error(tmp_path, capsys):
    cfg = _setup(tmp_path, _two_rounds(), _macro(tmp_path, ["2024Q1", "2024Q2"]))
    assert _run(cfg, tmp_path / "out", "gar") == [1]
    assert "input error" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericalFailure("solver diverged")

    monkeypatch.setattr(cli.pipeline, "moments_table", boom)
    assert _run(_setup(tmp_path, _two_rounds()), tmp_path / "out", "moments") == [2]
    assert "numerical failure" in capsys.readouterr().err


def test_seed_flag_reaches_the_log(tmp_path):
    out = tmp_path / "out"
    cfg = _setup(tmp_path, _two_rounds())
    assert cli.main(["signal", "--config", str(cfg), "--out", str(out), "--seed", "17"]) == 0
    assert _log(out)[0]["seed"] == 17


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])
