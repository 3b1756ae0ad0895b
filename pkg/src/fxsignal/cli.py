"""Command-line entry point.

Every stage runs on its own (``train``, ``score``, ``signals``, ``backtest``,
``evaluate``) or chained (``pipeline``). Any flag may also come from a flat
``key = value`` file passed with ``--config``; keys are the flag names with
dashes or underscores, and command-line flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from datetime import timedelta
from pathlib import Path
from typing import Optional, Sequence

from . import nbayes
from .backtest import BacktestConfig, run_backtest
from .ingest import Timeframe, format_timestamp
from .labels import REJECTED
from .lexicon import Engine, LexiconConfig
from .nbayes import NBConfig
from .pipeline import (ENGINE_NAMES, PipelineConfig, PipelineError, evaluate, make_scorer, read_news, read_prices,
                       read_stopwords, run_pipeline, scored_docs, stage, train_model, write_artifacts)
from .signals import FusionConfig, build_bar_signals, format_signals_csv, parse_signals_csv, signal_pairs

log = logging.getLogger("fxsignal")

SCORE_HEADER = ("timestamp", "pair", "source", "weight", "engine", "score", "predicted")


class ConfigFileError(ValueError):
    pass


def read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigFileError(f"cannot read config file {path}: {exc.strerror}") from None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(f"{path}:{line_no}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in values:
            raise ConfigFileError(f"{path}:{line_no}: duplicate key {key!r}")
        values[key] = value
    return values


# ---------------------------------------------------------------------------
# argument groups


def _news(p, help_text="news/post CSV (timestamp,source,pair,weight,label,text)"):
    p.add_argument("--news", type=Path, help=help_text)


def _prices(p):
    g = p.add_argument_group("prices")
    g.add_argument("--prices", type=Path, help="OHLC CSV (Date,Price,Open,High,Low,Vol.,Change %%)")
    g.add_argument("--pair", default="EURUSD", help="currency pair code of the price file (default %(default)s)")
    g.add_argument("--timeframe", default="H4", choices=[t.value for t in Timeframe],
                   help="bar timeframe (default %(default)s)")


def _resources(p):
    g = p.add_argument_group("sentiment engine")
    g.add_argument("--engine", default="lexicon", choices=[e.value for e in Engine],
                   help="sentiment engine (default %(default)s)")
    g.add_argument("--stopwords", type=Path, help="stop-word file (default: bundled English list)")
    g.add_argument("--lexicon", type=Path, help="token<TAB>valence lexicon (default: bundled lexicon)")
    g.add_argument("--model", type=Path, help="trained naive Bayes model file")
    g.add_argument("--train-news", type=Path,
                   help="labeled news CSV to train the naive Bayes model on when --model is not given")


def _lexicon_cfg(p):
    g = p.add_argument_group("lexicon scoring")
    g.add_argument("--alpha", type=float, default=15.0, help="polarity normalization constant (default %(default)s)")
    g.add_argument("--pos-threshold", type=float, default=0.05,
                   help="score at or above which sentiment is positive (default %(default)s)")
    g.add_argument("--neg-threshold", type=float, default=-0.05,
                   help="score at or below which sentiment is negative (default %(default)s)")


def _nb_cfg(p):
    g = p.add_argument_group("naive Bayes")
    g.add_argument("--min-count", type=int, default=2, help="vocabulary frequency cutoff (default %(default)s)")
    g.add_argument("--variance-floor-scale", type=float, default=1e-9,
                   help="variance floor as a fraction of the largest feature variance (default %(default)s)")
    g.add_argument("--rejection-threshold", type=float, default=0.5,
                   help="minimum winning posterior to accept a classification (default %(default)s)")


def _fusion_cfg(p):
    g = p.add_argument_group("signal fusion")
    g.add_argument("--strong-threshold", type=float, default=0.5,
                   help="|sentiment| at or above which a signal is graded strong (default %(default)s)")
    g.add_argument("--window-hours", type=float, default=24.0,
                   help="sentiment lookback window before each bar close (default %(default)s)")
    g.add_argument("--min-docs", type=int, default=1, help="documents needed in the window (default %(default)s)")
    g.add_argument("--sma-period", type=int, default=50, help="SMA period in bars (default %(default)s)")
    g.add_argument("--rsi-period", type=int, default=14, help="RSI period in bars (default %(default)s)")


def _backtest_cfg(p):
    g = p.add_argument_group("backtest")
    g.add_argument("--slippage", type=float, default=0.0,
                   help="adverse fill offset per side, in price units (default %(default)s)")
    g.add_argument("--max-hold-bars", type=int, default=42, help="forced exit after this many bars (default %(default)s)")
    g.add_argument("--fee", type=float, default=0.0, help="fee per side as a fraction (default %(default)s)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="fxsignal", description="Sentiment-driven Forex signal pipeline.", allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    subs = {}

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        p.add_argument("--config", help="flat key = value file supplying defaults for any flag")
        subs[name] = p
        return p

    p = command("train", "train the naive Bayes model on labeled news")
    _news(p, "labeled news CSV")
    p.add_argument("--stopwords", type=Path, help="stop-word file (default: bundled English list)")
    _nb_cfg(p)
    p.add_argument("--model-out", type=Path, help="where to write the model file")

    p = command("score", "score every news document")
    _news(p)
    _resources(p)
    _lexicon_cfg(p)
    _nb_cfg(p)
    p.add_argument("--out", default="-", help="output CSV (default: stdout)")

    p = command("signals", "generate per-bar trading signals")
    _news(p)
    _prices(p)
    _resources(p)
    _lexicon_cfg(p)
    _nb_cfg(p)
    _fusion_cfg(p)
    p.add_argument("--out", default="-", help="signals CSV (default: stdout)")

    p = command("backtest", "replay a signals CSV against prices")
    _prices(p)
    p.add_argument("--signals", type=Path, help="signals CSV from the signals command")
    _backtest_cfg(p)
    p.add_argument("--out-dir", type=Path, help="write backtest.json/.txt and equity.csv here (default: print text)")

    p = command("evaluate", "classification metrics on labeled news")
    _news(p, "labeled news CSV")
    _resources(p)
    _lexicon_cfg(p)
    _nb_cfg(p)
    p.add_argument("--out-dir", type=Path, help="write metrics.json/.txt here (default: print table)")

    p = command("pipeline", "run every stage and write all artifacts")
    _news(p)
    _prices(p)
    _resources(p)
    _lexicon_cfg(p)
    _nb_cfg(p)
    _fusion_cfg(p)
    _backtest_cfg(p)
    p.add_argument("--out-dir", type=Path, help="artifact directory")
    return parser, subs


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = subs[args.command]
        known = {a.dest for a in sub._actions} - {"help", "config"}
        try:
            values = read_config_file(args.config)
        except ConfigFileError as exc:
            sub.error(str(exc))
        unknown = sorted(set(values) - known)
        if unknown:
            sub.error(f"unknown config key(s) in {args.config}: {', '.join(unknown)}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# commands


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise PipelineError("cli", "missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def config_from_args(args) -> PipelineConfig:
    with stage("cli"):
        cfg = PipelineConfig(
            news=getattr(args, "news", None),
            prices=getattr(args, "prices", None),
            lexicon=getattr(args, "lexicon", None),
            stopwords=getattr(args, "stopwords", None),
            model=getattr(args, "model", None),
            train_news=getattr(args, "train_news", None),
            pair=getattr(args, "pair", "EURUSD"),
            timeframe=Timeframe(getattr(args, "timeframe", "H4")),
            engine=Engine(getattr(args, "engine", "lexicon")),
            sma_period=getattr(args, "sma_period", 50),
            rsi_period=getattr(args, "rsi_period", 14),
            lexicon_config=LexiconConfig(getattr(args, "alpha", 15.0), getattr(args, "pos_threshold", 0.05),
                                         getattr(args, "neg_threshold", -0.05)),
            nb_config=NBConfig(getattr(args, "min_count", 2), getattr(args, "variance_floor_scale", 1e-9),
                               getattr(args, "rejection_threshold", 0.5)),
        )
        if hasattr(args, "strong_threshold"):
            cfg.fusion = FusionConfig(cfg.lexicon_config.pos_threshold, cfg.lexicon_config.neg_threshold,
                                      args.strong_threshold, timedelta(hours=args.window_hours), args.min_docs)
        if hasattr(args, "slippage"):
            cfg.backtest = BacktestConfig(args.slippage, args.max_hold_bars, args.fee)
    cfg.check_paths()
    return cfg


def _emit(text: str, dest: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def cmd_train(args) -> int:
    _require(args, "news", "model_out")
    cfg = config_from_args(args)
    model = train_model(read_news(cfg.news), read_stopwords(cfg.stopwords), cfg.nb_config, cfg.news)
    nbayes.save_model(model, args.model_out)
    log.info("wrote model with %d features to %s", model.n_features, args.model_out)
    return 0


def _scorer_for(cfg):
    records = read_news(cfg.news)
    stopwords = read_stopwords(cfg.stopwords)
    scorer, _, _ = make_scorer(cfg, records, stopwords)
    return records, scorer


def cmd_score(args) -> int:
    _require(args, "news")
    cfg = config_from_args(args)
    records, scorer = _scorer_for(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_HEADER)
    for d in scorer.score_all(records):
        r = d.record
        w.writerow([format_timestamp(r.timestamp), r.pair, r.source, repr(r.relevance_weight), scorer.engine.value,
                    "" if d.score is None else repr(d.score.value),
                    REJECTED if d.predicted is None else d.predicted.value])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_signals(args) -> int:
    _require(args, "news", "prices")
    cfg = config_from_args(args)
    records, scorer = _scorer_for(cfg)
    series = read_prices(cfg.prices, cfg.pair, cfg.timeframe)
    results = scorer.score_all(records)
    with stage("signals", cfg.prices):
        rows = build_bar_signals(series, scored_docs(results, series.pair), cfg.fusion, cfg.sma_period, cfg.rsi_period)
    _emit(format_signals_csv(rows), args.out)
    return 0


def cmd_backtest(args) -> int:
    _require(args, "prices", "signals")
    cfg = config_from_args(args)
    series = read_prices(cfg.prices, cfg.pair, cfg.timeframe)
    with stage("signals", args.signals):
        rows = parse_signals_csv(Path(args.signals).read_text(encoding="utf-8"))
    with stage("backtest", args.signals):
        report = run_backtest(series, signal_pairs([r for r in rows if r.pair == series.pair]), cfg.backtest)
    if args.out_dir is None:
        sys.stdout.write(report.to_text())
    else:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "backtest.json").write_text(report.to_json(), encoding="utf-8")
        (args.out_dir / "backtest.txt").write_text(report.to_text(), encoding="utf-8")
        (args.out_dir / "equity.csv").write_text(report.equity_csv(), encoding="utf-8")
    return 0


def cmd_evaluate(args) -> int:
    _require(args, "news")
    cfg = config_from_args(args)
    records, scorer = _scorer_for(cfg)
    metrics = evaluate(scorer.score_all(records))
    if metrics is None:
        raise PipelineError("metrics", "no labeled (and accepted) documents to evaluate", cfg.news)
    name = ENGINE_NAMES[cfg.engine]
    if args.out_dir is None:
        sys.stdout.write(metrics.to_table(name))
    else:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "metrics.json").write_text(metrics.to_json(), encoding="utf-8")
        (args.out_dir / "metrics.txt").write_text(metrics.to_table(name), encoding="utf-8")
    return 0


def cmd_pipeline(args) -> int:
    _require(args, "news", "prices", "out_dir")
    cfg = config_from_args(args)
    result = run_pipeline(cfg)
    for p in write_artifacts(result, args.out_dir):
        log.info("wrote %s", p)
    sys.stdout.write(result.report.to_text())
    return 0


COMMANDS = {
    "train": cmd_train,
    "score": cmd_score,
    "signals": cmd_signals,
    "backtest": cmd_backtest,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"fxsignal: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
