"""Command-line front end.

    spdsignal moments   per-histogram moments (moments.csv, moment_correlations.csv)
    spdsignal signal    per-forecaster signal records (signal_records.csv)
    spdsignal ssi       signal strength index and class shares (ssi.csv, signal_shares.csv)
    spdsignal gar       growth-at-risk model comparison (gar_results.csv, gar_trace.csv, gar_data.csv)
    spdsignal replicate all of the above

Every command writes ``run.log`` (JSON lines, no timestamps) next to its
CSVs. Exit codes: 0 ok, 1 input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import pandas as pd

from . import pipeline
from .config import RunConfig, load_config
from .errors import ConfigError, InputError, InsufficientData, NumericalError, SpdSignalError
from .gar.evaluate import evaluate_models, results_frame, trace_frame
from .ingest import load_macro_csv, parse_spd_csv

log = logging.getLogger("spdsignal")

FLOAT_FORMAT = "%.12g"


class _JsonLines(logging.Formatter):
    def format(self, record):
        entry = {"level": record.levelname.lower(), "logger": record.name, "message": record.getMessage()}
        entry.update(getattr(record, "fields", {}))
        return json.dumps(entry, sort_keys=True, default=str)


def _attach_log(out: Path) -> logging.Handler:
    handler = logging.FileHandler(out / "run.log", mode="w", encoding="utf-8")
    handler.setFormatter(_JsonLines())
    root = logging.getLogger()
    root.addHandler(handler)
    root.setLevel(logging.INFO)
    logging.captureWarnings(True)
    return handler


def _event(message: str, **fields):
    log.info(message, extra={"fields": fields})


def _write(frame: pd.DataFrame, out: Path, name: str, index: bool = False):
    path = out / name
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    _event("wrote", file=name, rows=len(frame))


def _require(cfg: RunConfig, *keys):
    missing = [k for k in keys if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(f"config lacks {', '.join(missing)}")


class _Run:
    """Stage results shared by the commands of one invocation."""

    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg, self.out = cfg, out
        self._moments = self._records = self._ssi = None

    def moments(self):
        if self._moments is None:
            _require(self.cfg, "spd_path")
            panel = parse_spd_csv(self.cfg.spd_path)
            panel = pipeline.single_slice(panel, self.cfg.spd_horizon, self.cfg.variable)
            _event("parsed survey panel", records=len(panel), rounds=len(panel.rounds))
            self._moments = pipeline.moments_table(
                panel, self.cfg.tail_policy, self.cfg.tail_rule_obj, self.cfg.include_kelly
            )
        return self._moments

    def records(self):
        if self._records is None:
            table, _ = self.moments()
            self._records = pipeline.signal_records(table, self.cfg.target, self.cfg.skew)
        return self._records

    def index(self):
        if self._ssi is None:
            self._ssi = pipeline.index_series(self.records(), self.cfg.aggregation, self.cfg.norm_scheme)
        return self._ssi


def cmd_moments(run: _Run):
    table, sets = run.moments()
    _write(table, run.out, "moments.csv")
    flagged = int((table["flags"] != "").sum())
    if flagged:
        log.warning("some estimators were undefined", extra={"fields": {"flagged_rows": flagged}})
    try:
        corr = pipeline.correlation_table(sets, skew=run.cfg.skew)
    except InsufficientData as exc:
        # a handful of histograms still has moments, just no correlations
        log.warning("skipped moment correlations", extra={"fields": {"reason": str(exc)}})
        return
    corr.index.name = "measure"
    _write(corr, run.out, "moment_correlations.csv", index=True)


def cmd_signal(run: _Run):
    _write(run.records(), run.out, "signal_records.csv")


def cmd_ssi(run: _Run):
    series, summary = run.index()
    frame = series.to_frame()
    for col in ("q_q1", "q_q3", "a_q1", "a_q3", "n"):
        frame[col] = summary[col]
    frame.index.name = "round"
    _write(frame, run.out, "ssi.csv", index=True)
    shares = summary[[c for c in summary.columns if c.startswith("share_")]]
    shares.index.name = "round"
    _write(shares, run.out, "signal_shares.csv", index=True)


def cmd_gar(run: _Run):
    cfg = run.cfg
    _require(cfg, "spd_path", "gdp_path", "nfci_path")
    table, _ = run.moments()
    series, _ = run.index()
    gdp = load_macro_csv(cfg.gdp_path, "GDP", aggregate=cfg.gdp_aggregate)
    nfci = load_macro_csv(cfg.nfci_path, "NFCI", aggregate=cfg.nfci_aggregate)
    spf = pipeline.spf_series(table, cfg.spf_aggregation)
    aligned = pipeline.gar_table(gdp.series, nfci.series, spf, series.ssi, h=cfg.horizon)
    if aligned.dropped:
        log.warning("rows dropped for missing regressors", extra={"fields": {"dropped": aligned.dropped}})
    _event("aligned regression table", rows=len(aligned.frame), h=cfg.horizon)
    _write(aligned.frame, run.out, "gar_data.csv", index=True)
    results = evaluate_models(aligned.frame, h=cfg.horizon, config=cfg.eval_config)
    _write(results_frame(results), run.out, "gar_results.csv")
    _write(trace_frame(results), run.out, "gar_trace.csv")
    capped = sum(r.capped_count for r in results)
    if capped:
        log.warning("log score capped", extra={"fields": {"periods": capped}})


def cmd_replicate(run: _Run):
    for cmd in (cmd_moments, cmd_signal, cmd_ssi, cmd_gar):
        cmd(run)


COMMANDS = {
    "moments": cmd_moments,
    "signal": cmd_signal,
    "ssi": cmd_ssi,
    "gar": cmd_gar,
    "replicate": cmd_replicate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spdsignal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="TOML config (default: the bundled synthetic replication)")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = None
    try:
        cfg = load_config(args.config, out_dir=args.out, seed=args.seed)
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        handler = _attach_log(out)
        _event("start", command=args.command, seed=cfg.seed)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](_Run(cfg, out))
        _event("done", command=args.command)
        return 0
    except SpdSignalError as exc:
        kind = "numerical failure" if isinstance(exc, NumericalError) else "input error"
        print(f"spdsignal: {kind}: {exc}", file=sys.stderr)
        if handler is not None:
            log.error(str(exc), extra={"fields": {"error": type(exc).__name__}})
        return exc.exit_code if isinstance(exc, (InputError, NumericalError)) else 1
    finally:
        if handler is not None:
            logging.getLogger().removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
