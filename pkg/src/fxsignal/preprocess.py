"""Text normalization and stop-word filtering for news headlines and posts."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .ingest import NewsRecord

_URL = re.compile(r"(?:https?://|www\.)\S*")
_TAG = re.compile(r"[@#]\S*")
_NON_TOKEN = re.compile(r"[^a-z0-9']+")
_LOOSE_APOSTROPHE = re.compile(r"(?<![a-z0-9])'|'(?![a-z0-9])")
_CURLY_QUOTES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})

TOKEN_PATTERN = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class ProcessedDoc:
    tokens: tuple[str, ...]
    source_record: Optional[NewsRecord] = None

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def normalize(text: str) -> str:
    """Lowercase ``text`` and reduce it to space-separated ``[a-z0-9']`` words.

    URLs (``http://``, ``https://``, ``www.``), @mentions and #hashtags are
    removed whole. Accented letters are folded to ASCII and any other
    non-ASCII character is dropped. Apostrophes survive only inside a word.
    """
    s = unicodedata.normalize("NFKD", text.translate(_CURLY_QUOTES))
    s = s.encode("ascii", "ignore").decode("ascii").lower()
    s = _URL.sub(" ", s)
    s = _TAG.sub(" ", s)
    s = _NON_TOKEN.sub(" ", s)
    s = _LOOSE_APOSTROPHE.sub(" ", s)
    return " ".join(s.split())


def tokenize_and_filter(text: str, stopwords: Iterable[str] = frozenset()) -> list[str]:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    return [t for t in text.split() if t not in stop]


def preprocess(record: Union[NewsRecord, str], stopwords: Iterable[str] = frozenset()) -> ProcessedDoc:
    if isinstance(record, NewsRecord):
        return ProcessedDoc(tuple(tokenize_and_filter(normalize(record.text), stopwords)), record)
    return ProcessedDoc(tuple(tokenize_and_filter(normalize(record), stopwords)))


def load_stopwords(path: Union[str, Path, None] = None) -> frozenset[str]:
    """Read a stop-word file (one word per line, ``#`` comments).

    With no path the bundled English list is used.
    """
    if path is None:
        text = resources.files("fxsignal").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)
