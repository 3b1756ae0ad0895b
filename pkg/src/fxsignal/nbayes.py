"""Gaussian naive Bayes sentiment classifier with a rejection option.

Documents become relative term-frequency vectors over a vocabulary built from
the training corpus. Each class models every feature as an independent
Gaussian; the posterior is computed in log space and normalized with the
max-shift trick, so no product of densities is ever formed.
"""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .labels import CLASSES, Label
from .lexicon import Engine, SentimentScore, clamp_open_unit

FORMAT_TAG = "fxsignal-nbmodel"
FORMAT_VERSION = 1

_LOG_2PI = math.log(2.0 * math.pi)
_NEUTRAL = CLASSES.index(Label.NEUTRAL)


class NBError(ValueError):
    pass


@dataclass(frozen=True)
class NBConfig:
    min_count: int = 2
    variance_floor_scale: float = 1e-9
    rejection_threshold: float = 0.5

    def __post_init__(self):
        if int(self.min_count) != self.min_count or self.min_count < 1:
            raise ValueError(f"min_count must be an integer >= 1, got {self.min_count}")
        if not self.variance_floor_scale > 0:
            raise ValueError("variance_floor_scale must be positive")
        if not 0.0 <= self.rejection_threshold < 1.0:
            raise ValueError("rejection_threshold must lie in [0, 1)")


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    min_count: int = 1
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if list(self.tokens) != sorted(set(self.tokens)):
            raise NBError("vocabulary tokens must be unique and lexicographically sorted")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index


Doc = Union[Sequence[str], Iterable[str]]


def build_vocabulary(corpus: Iterable[Doc], min_count: int = 2) -> Vocabulary:
    """Tokens whose total corpus frequency reaches ``min_count``, sorted."""
    counts: Counter = Counter()
    n_docs = 0
    for doc in corpus:
        counts.update(doc)
        n_docs += 1
    if n_docs == 0:
        raise NBError("cannot build a vocabulary from an empty corpus")
    tokens = sorted(t for t, c in counts.items() if c >= min_count)
    if not tokens:
        raise NBError(f"vocabulary is empty after applying min_count={min_count}")
    return Vocabulary(tuple(tokens), min_count)


def featurize(doc: Doc, vocab: Vocabulary) -> np.ndarray:
    """Relative term frequencies; out-of-vocabulary tokens still count toward length."""
    tokens = list(doc)
    x = np.zeros(len(vocab))
    for t in tokens:
        i = vocab.index.get(t)
        if i is not None:
            x[i] += 1.0
    return x / max(1, len(tokens))


def featurize_many(docs: Iterable[Doc], vocab: Vocabulary) -> np.ndarray:
    rows = [featurize(d, vocab) for d in docs]
    return np.vstack(rows) if rows else np.zeros((0, len(vocab)))


@dataclass(frozen=True)
class NBModel:
    vocabulary: Vocabulary
    priors: np.ndarray  # (3,) in CLASSES order
    means: np.ndarray  # (3, n_features)
    variances: np.ndarray  # (3, n_features), floored
    variance_floor: float
    config: NBConfig = NBConfig()

    def __post_init__(self):
        n = len(self.vocabulary)
        for name, shape in (("priors", (3,)), ("means", (3, n)), ("variances", (3, n))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise NBError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.priors <= 0) or abs(float(self.priors.sum()) - 1.0) > 1e-12:
            raise NBError("priors must be positive and sum to 1")
        if not self.variance_floor > 0 or np.any(self.variances < self.variance_floor):
            raise NBError("variances must be at least the positive variance floor")

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)


def fit_features(X: np.ndarray, y: Sequence[Label], vocab: Vocabulary,
                 config: NBConfig = NBConfig()) -> NBModel:
    """Estimate priors and per-class Gaussian parameters from a feature matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(vocab):
        raise NBError(f"feature matrix shape {X.shape} does not match vocabulary size {len(vocab)}")
    labels = [Label(v) for v in y]
    if len(labels) != X.shape[0]:
        raise NBError("feature rows and labels differ in length")
    y_idx = np.array([CLASSES.index(v) for v in labels], dtype=int)

    for k, cls in enumerate(CLASSES):
        if not np.any(y_idx == k):
            raise NBError(f"no training documents for class {cls.value!r}")

    pooled = float(X.var(axis=0).max())
    floor = config.variance_floor_scale * (pooled if pooled > 0 else 1.0)

    priors = np.array([np.count_nonzero(y_idx == k) for k in range(3)], dtype=float) / len(y_idx)
    means = np.vstack([X[y_idx == k].mean(axis=0) for k in range(3)])
    variances = np.vstack([X[y_idx == k].var(axis=0) for k in range(3)])
    variances = np.maximum(variances, floor)
    return NBModel(vocab, priors, means, variances, floor, config)


def train(labeled: Iterable[tuple[Doc, Label]], config: NBConfig = NBConfig()) -> NBModel:
    docs, labels = [], []
    for doc, label in labeled:
        docs.append(list(doc))
        labels.append(Label(label))
    present = set(labels)
    for cls in CLASSES:
        if cls not in present:
            raise NBError(f"no training documents for class {cls.value!r}")
    vocab = build_vocabulary(docs, config.min_count)
    return fit_features(featurize_many(docs, vocab), labels, vocab, config)


def log_joint(model: NBModel, x: np.ndarray) -> np.ndarray:
    """Unnormalized log P(y) + sum_i log N(x_i; mu_y,i, var_y,i) per class."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.n_features:
        raise NBError(f"feature vector has {x.shape[-1]} entries, model expects {model.n_features}")
    var = model.variances
    if x.ndim == 1:
        sq = ((x[None, :] - model.means) ** 2 / var).sum(axis=1)
    else:
        sq = ((x[:, None, :] - model.means[None]) ** 2 / var[None]).sum(axis=2)
    log_norm = -0.5 * (_LOG_2PI * model.n_features + np.log(var).sum(axis=1))
    return np.log(model.priors) + log_norm - 0.5 * sq


def normalize_log(scores: np.ndarray) -> np.ndarray:
    shifted = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def posterior(model: NBModel, x: np.ndarray) -> np.ndarray:
    """Class posteriors in (negative, neutral, positive) order; rows sum to 1."""
    return normalize_log(log_joint(model, x))


def decide(probs: Sequence[float], threshold: float) -> Optional[Label]:
    """MAP label, or ``None`` when the winning posterior does not exceed ``threshold``.

    Any exact tie for the maximum resolves to neutral, so a tie between the
    two directional classes never yields a direction.
    """
    p = [float(v) for v in probs]
    best = max(p)
    winners = [k for k, v in enumerate(p) if v == best]
    k = winners[0] if len(winners) == 1 else _NEUTRAL
    return CLASSES[k] if best > threshold else None


def classify(model: NBModel, x: np.ndarray) -> Optional[Label]:
    return decide(posterior(model, x), model.config.rejection_threshold)


def score_from_posterior(probs: Sequence[float]) -> SentimentScore:
    p_neg, _, p_pos = (float(v) for v in probs)
    return SentimentScore(clamp_open_unit(p_pos - p_neg), Engine.NBAYES)


def nb_sentiment_score(model: NBModel, x: np.ndarray) -> SentimentScore:
    return score_from_posterior(posterior(model, x))


# ---------------------------------------------------------------------------
# persistence


def dumps(model: NBModel) -> str:
    buf = io.StringIO()
    cfg = model.config
    buf.write(f"{FORMAT_TAG} {FORMAT_VERSION}\n")
    buf.write(f"min_count {cfg.min_count}\n")
    buf.write(f"variance_floor_scale {cfg.variance_floor_scale!r}\n")
    buf.write(f"rejection_threshold {cfg.rejection_threshold!r}\n")
    buf.write(f"variance_floor {model.variance_floor!r}\n")
    buf.write("classes " + " ".join(c.value for c in CLASSES) + "\n")
    buf.write("priors " + " ".join(repr(float(p)) for p in model.priors) + "\n")
    buf.write(f"vocabulary {model.n_features}\n")
    buf.write("# token " + " ".join(f"mean_{c.value} var_{c.value}" for c in CLASSES) + "\n")
    for i, tok in enumerate(model.vocabulary.tokens):
        cols = []
        for k in range(3):
            cols += [repr(float(model.means[k, i])), repr(float(model.variances[k, i]))]
        buf.write(tok + " " + " ".join(cols) + "\n")
    return buf.getvalue()


def loads(text: str) -> NBModel:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        tag, version = lines[0].split()
        if tag != FORMAT_TAG or int(version) != FORMAT_VERSION:
            raise NBError(f"unsupported model format {lines[0]!r}")
        head = dict(ln.split(" ", 1) for ln in lines[1:8])
        config = NBConfig(int(head["min_count"]), float(head["variance_floor_scale"]),
                          float(head["rejection_threshold"]))
        if head["classes"].split() != [c.value for c in CLASSES]:
            raise NBError(f"unexpected class list {head['classes']!r}")
        priors = [float(v) for v in head["priors"].split()]
        n = int(head["vocabulary"])
        rows = [ln.split() for ln in lines[8:8 + n]]
        if len(rows) != n or len(lines) != 8 + n or any(len(r) != 7 for r in rows):
            raise NBError("model table is truncated or malformed")
    except (IndexError, KeyError, ValueError) as exc:
        if isinstance(exc, NBError):
            raise
        raise NBError(f"malformed model file: {exc}") from None
    vocab = Vocabulary(tuple(r[0] for r in rows), config.min_count)
    table = np.array([[float(v) for v in r[1:]] for r in rows]).reshape(n, 6)
    return NBModel(vocab, np.array(priors), table[:, 0::2].T, table[:, 1::2].T,
                   float(head["variance_floor"]), config)


def save_model(model: NBModel, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path: Union[str, Path]) -> NBModel:
    return loads(Path(path).read_text(encoding="utf-8"))
