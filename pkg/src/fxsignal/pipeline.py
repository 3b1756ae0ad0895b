"""End-to-end orchestration: ingest, score, fuse, backtest, evaluate."""

from __future__ import annotations

import contextlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

from . import nbayes
from .backtest import BacktestConfig, BacktestReport, run_backtest
from .ingest import NewsRecord, PriceSeries, Timeframe, parse_news_csv, parse_ohlc_csv
from .labels import Label
from .lexicon import Engine, Lexicon, LexiconConfig, SentimentScore, classify_polarity, load_lexicon, polarity_score
from .metrics import MetricsReport, compute_metrics, confusion
from .nbayes import NBConfig, NBModel
from .preprocess import ProcessedDoc, load_stopwords, preprocess
from .signals import BarSignal, FusionConfig, ScoredDoc, build_bar_signals, format_signals_csv, signal_pairs

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

ENGINE_NAMES = {Engine.LEXICON: "Lexicon-based", Engine.NBAYES: "Naive Bayes"}


class PipelineError(Exception):
    """A stage failure, tagged with the stage (module) and the file involved."""

    def __init__(self, stage: str, message: str, path: Optional[PathLike] = None):
        self.stage = stage
        self.path = None if path is None else str(path)
        where = f" {self.path}:" if self.path else ""
        super().__init__(f"[{stage}]{where} {message}")


@contextlib.contextmanager
def stage(name: str, path: Optional[PathLike] = None) -> Iterator[None]:
    try:
        yield
    except PipelineError:
        raise
    except (ValueError, KeyError, OSError) as exc:
        raise PipelineError(name, str(exc), path) from exc


def _existing(path: Optional[PathLike], what: str) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise PipelineError("cli", f"{what} not found", p)
    return p


@dataclass
class PipelineConfig:
    news: Optional[Path] = None
    prices: Optional[Path] = None
    lexicon: Optional[Path] = None  # None -> bundled lexicon
    stopwords: Optional[Path] = None  # None -> bundled list
    model: Optional[Path] = None
    train_news: Optional[Path] = None
    pair: str = "EURUSD"
    timeframe: Timeframe = Timeframe.H4
    engine: Engine = Engine.LEXICON
    sma_period: int = 50
    rsi_period: int = 14
    fusion: FusionConfig = field(default_factory=FusionConfig)
    backtest: BacktestConfig = field(default_factory=BacktestConfig)
    lexicon_config: LexiconConfig = field(default_factory=LexiconConfig)
    nb_config: NBConfig = field(default_factory=NBConfig)

    def check_paths(self) -> None:
        for attr in ("news", "prices", "lexicon", "stopwords", "model", "train_news"):
            value = getattr(self, attr)
            if value is not None:
                setattr(self, attr, _existing(value, f"{attr.replace('_', ' ')} file"))


# ---------------------------------------------------------------------------
# stages


def read_news(path: PathLike) -> list[NewsRecord]:
    with stage("ingest", path), open(path, "rb") as fh:
        return parse_news_csv(fh)


def read_prices(path: PathLike, pair: str, timeframe: Timeframe) -> PriceSeries:
    with stage("ingest", path), open(path, "rb") as fh:
        return parse_ohlc_csv(fh, pair, timeframe)


def read_stopwords(path: Optional[PathLike]) -> frozenset[str]:
    with stage("preprocess", path):
        return load_stopwords(path)


def read_lexicon(path: Optional[PathLike]) -> Lexicon:
    with stage("lexicon", path):
        return load_lexicon(path)


def labeled_docs(records: Sequence[NewsRecord], stopwords: frozenset[str]) -> list[tuple[ProcessedDoc, Label]]:
    return [(preprocess(r, stopwords), r.label) for r in records if r.label is not None]


def train_model(records: Sequence[NewsRecord], stopwords: frozenset[str], config: NBConfig,
                path: Optional[PathLike] = None) -> NBModel:
    with stage("nbayes", path):
        data = labeled_docs(records, stopwords)
        if not data:
            raise ValueError("no labeled documents to train on")
        return nbayes.train(data, config)


def resolve_model(cfg: PipelineConfig, records: Sequence[NewsRecord],
                  stopwords: frozenset[str]) -> tuple[NBModel, bool]:
    """Load ``cfg.model`` or train one; the flag says whether training happened."""
    if cfg.model is not None:
        with stage("nbayes", cfg.model):
            return nbayes.load_model(cfg.model), False
    if cfg.train_news is not None:
        return train_model(read_news(cfg.train_news), stopwords, cfg.nb_config, cfg.train_news), True
    log.warning("no model or training file given; training in-sample on labeled rows of the news file")
    return train_model(records, stopwords, cfg.nb_config, cfg.news), True


@dataclass(frozen=True)
class DocResult:
    record: NewsRecord
    score: Optional[SentimentScore]  # None when the classifier abstained
    predicted: Optional[Label]


class Scorer:
    """Per-document scoring with either engine."""

    def __init__(self, engine: Engine, stopwords: frozenset[str], lexicon: Optional[Lexicon] = None,
                 lexicon_config: LexiconConfig = LexiconConfig(), model: Optional[NBModel] = None):
        self.engine = Engine(engine)
        self.stopwords = stopwords
        self.lexicon = lexicon
        self.lexicon_config = lexicon_config
        self.model = model
        if self.engine is Engine.LEXICON and lexicon is None:
            raise ValueError("lexicon engine needs a lexicon")
        if self.engine is Engine.NBAYES and model is None:
            raise ValueError("nbayes engine needs a model")

    def score(self, record: NewsRecord) -> DocResult:
        doc = preprocess(record, self.stopwords)
        if self.engine is Engine.LEXICON:
            s = polarity_score(doc, self.lexicon, self.lexicon_config)
            return DocResult(record, s, classify_polarity(s, self.lexicon_config))
        x = nbayes.featurize(doc, self.model.vocabulary)
        probs = nbayes.posterior(self.model, x)
        label = nbayes.decide(probs, self.model.config.rejection_threshold)
        if label is None:
            return DocResult(record, None, None)
        return DocResult(record, nbayes.score_from_posterior(probs), label)

    def score_all(self, records: Sequence[NewsRecord]) -> list[DocResult]:
        with stage(self.engine.value):
            return [self.score(r) for r in records]


def scored_docs(results: Sequence[DocResult], pair: str) -> list[ScoredDoc]:
    return [ScoredDoc(d.record.timestamp, d.score, d.record.relevance_weight)
            for d in results if d.score is not None and d.record.pair == pair.upper()]


def evaluate(results: Sequence[DocResult]) -> Optional[MetricsReport]:
    labeled = [d for d in results if d.record.label is not None]
    if not labeled:
        return None
    with stage("metrics"):
        matrix = confusion([d.predicted for d in labeled], [d.record.label for d in labeled])
        if matrix.total == 0:
            log.warning("every labeled document was rejected; no metrics")
            return None
        return compute_metrics(matrix)


def make_scorer(cfg: PipelineConfig, records: Sequence[NewsRecord],
                stopwords: frozenset[str]) -> tuple[Scorer, Optional[NBModel], bool]:
    if cfg.engine is Engine.LEXICON:
        return Scorer(Engine.LEXICON, stopwords, read_lexicon(cfg.lexicon), cfg.lexicon_config), None, False
    model, trained = resolve_model(cfg, records, stopwords)
    return Scorer(Engine.NBAYES, stopwords, model=model), model, trained


@dataclass
class PipelineResult:
    signals: list[BarSignal]
    report: BacktestReport
    metrics: Optional[MetricsReport]
    model: Optional[NBModel]
    trained: bool
    engine: Engine = Engine.LEXICON

    def artifacts(self) -> dict[str, str]:
        out = {
            "signals.csv": format_signals_csv(self.signals),
            "backtest.json": self.report.to_json(),
            "backtest.txt": self.report.to_text(),
            "equity.csv": self.report.equity_csv(),
        }
        if self.metrics is not None:
            out["metrics.json"] = self.metrics.to_json()
            out["metrics.txt"] = self.metrics.to_table(ENGINE_NAMES[self.engine])
        if self.trained and self.model is not None:
            out["model.txt"] = nbayes.dumps(self.model)
        return out


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    if cfg.news is None or cfg.prices is None:
        raise PipelineError("cli", "pipeline needs both a news file and a price file")
    cfg.check_paths()
    records = read_news(cfg.news)
    series = read_prices(cfg.prices, cfg.pair, cfg.timeframe)
    stopwords = read_stopwords(cfg.stopwords)
    scorer, model, trained = make_scorer(cfg, records, stopwords)
    results = scorer.score_all(records)

    with stage("signals", cfg.prices):
        rows = build_bar_signals(series, scored_docs(results, series.pair), cfg.fusion,
                                 cfg.sma_period, cfg.rsi_period)
    with stage("backtest", cfg.prices):
        report = run_backtest(series, signal_pairs(rows), cfg.backtest)
    return PipelineResult(rows, report, evaluate(results), model, trained, cfg.engine)


def write_artifacts(result: PipelineResult, out_dir: PathLike) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in sorted(result.artifacts().items()):
        p = out / name
        p.write_text(text, encoding="utf-8")
        written.append(p)
    return written
