import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fxsignal.ingest import NewsRecord, parse_timestamp
from fxsignal.preprocess import TOKEN_PATTERN, load_stopwords, normalize, preprocess, tokenize_and_filter


@pytest.mark.parametrize("raw, expected", [
    ("", ""),
    ("Federal Reserve announces interest rate hike, boosting dollar",
     "federal reserve announces interest rate hike boosting dollar"),
    # mentions, links and hashtags go whole; ordinary words survive
    ("@trader check https://x.co #USD Dollar UP!", "check dollar up"),
    ("see www.example.com/fx?q=1 now", "see now"),
    ("Don't panic: 'USD' ... it’s fine", "don't panic usd it's fine"),
    ("Crème brûlée ∆ rally", "creme brulee rally"),
    ("EUR/USD 1.0987 +1.37%", "eur usd 1 0987 1 37"),
])
def test_normalize(raw, expected):
    assert normalize(raw) == expected


@pytest.mark.parametrize("text, stop, expected", [
    ("dollar up", set(), ["dollar", "up"]),
    ("the dollar is up", {"the", "is"}, ["dollar", "up"]),
    ("the the the", {"the"}, []),
])
def test_tokenize_and_filter(text, stop, expected):
    assert tokenize_and_filter(text, stop) == expected


def test_bundled_stopwords():
    words = load_stopwords()
    assert 170 <= len(words) <= 180
    assert {"the", "is", "don't", "up"} <= words
    assert all(TOKEN_PATTERN.fullmatch(w) for w in words)


def test_stopword_file_comments(tmp_path):
    p = tmp_path / "stop.txt"
    p.write_text("# header\nThe\n\n  of  # trailing comment\n")
    assert load_stopwords(p) == {"the", "of"}


def test_preprocess_keeps_source(stopwords):
    rec = NewsRecord(parse_timestamp("2023-04-20T08:00:00Z"), "reuters", "USDCAD", 1.0,
                     "The Federal Reserve announces a hike")
    doc = preprocess(rec, stopwords)
    assert doc.tokens == ("federal", "reserve", "announces", "hike")
    assert doc.source_record is rec


@settings(max_examples=400, deadline=None)
@given(st.text())
def test_normalize_idempotent_and_clean(text):
    once = normalize(text)
    assert normalize(once) == once
    for tok in once.split():
        assert TOKEN_PATTERN.fullmatch(tok)
        assert not set(tok) & set("@#/:") and tok == tok.lower()


@settings(max_examples=200, deadline=None)
@given(st.text(), st.sets(st.sampled_from(["the", "a", "dollar", "up", "x", "1"])))
def test_filter_is_subsequence(text, stop):
    words = normalize(text).split()
    kept = tokenize_and_filter(" ".join(words), stop)
    it = iter(words)
    assert all(any(t == w for w in it) for t in kept)
    assert not set(kept) & stop
