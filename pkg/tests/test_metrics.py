import json
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fxsignal.labels import CLASSES
from fxsignal.metrics import ConfusionMatrix, MetricsError, compute_metrics, confusion, f1_score

NEG, NEU, POS = CLASSES


def test_perfect_classifier():
    labels = [NEG, NEU, POS, POS]
    m = confusion(labels, labels)
    assert np.array_equal(m.counts, np.diag([1, 1, 2]))
    rep = compute_metrics(m)
    assert rep.accuracy == rep.macro_precision == rep.macro_recall == rep.macro_f1 == rep.coverage == 1.0


def test_all_rejected():
    m = confusion([None] * 4, [POS, NEG, NEU, POS])
    assert m.total == 0 and m.abstentions == 4
    with pytest.raises(MetricsError):
        compute_metrics(m)


def test_hand_tally():
    m = confusion([POS, NEG, None], [POS, POS, NEU])
    assert m.cell(POS, POS) == 1 and m.cell(POS, NEG) == 1 and m.abstentions == 1
    assert m.total == 2 and m.evaluated == 3
    assert compute_metrics(m).coverage == pytest.approx(2 / 3)


def test_embedded_two_class_matrix():
    counts = np.zeros((3, 3), dtype=int)
    counts[0, 0], counts[0, 2], counts[2, 0], counts[2, 2] = 5, 1, 2, 4
    rep = compute_metrics(ConfusionMatrix(counts))
    neg, neu, pos = (rep.per_class[c] for c in CLASSES)
    assert (neg.precision, neg.recall) == (pytest.approx(5 / 7), pytest.approx(5 / 6))
    assert (pos.precision, pos.recall) == (pytest.approx(4 / 5), pytest.approx(4 / 6))
    assert (neu.precision, neu.recall, neu.f1, neu.support) == (0.0, 0.0, 0.0, 0)
    assert neg.f1 == pytest.approx(2 * (5 / 7) * (5 / 6) / (5 / 7 + 5 / 6))
    assert pos.f1 == pytest.approx(2 * 0.8 * (2 / 3) / (0.8 + 2 / 3))
    assert rep.accuracy == pytest.approx(9 / 12)
    assert rep.macro_precision == pytest.approx((5 / 7 + 4 / 5) / 3)
    assert rep.macro_recall == pytest.approx((5 / 6 + 4 / 6) / 3)


@pytest.mark.parametrize("p, r, f1", [(0.87, 0.85, 0.86), (0.72, 0.70, 0.71)])
def test_reported_pr_pairs_f1(p, r, f1):
    assert abs(f1_score(p, r) - f1) <= 0.005


def test_f1_zero_denominator():
    assert f1_score(0.0, 0.0) == 0.0


def test_length_mismatch():
    with pytest.raises(MetricsError, match="length mismatch"):
        confusion([POS], [POS, NEG])


def test_rejects_bad_matrix():
    with pytest.raises(MetricsError):
        ConfusionMatrix(np.array([[-1, 0, 0], [0, 0, 0], [0, 0, 0]]))


labels = st.sampled_from(CLASSES)
pairs = st.lists(st.tuples(st.one_of(st.none(), labels), labels), min_size=1, max_size=60)


@given(pairs, st.randoms(use_true_random=False))
def test_permutation_invariance(data, rnd):
    m1 = confusion(*zip(*data))
    shuffled = list(data)
    rnd.shuffle(shuffled)
    m2 = confusion(*zip(*shuffled))
    assert np.array_equal(m1.counts, m2.counts) and m1.abstentions == m2.abstentions
    if m1.total:
        assert compute_metrics(m1).to_json() == compute_metrics(m2).to_json()


@given(st.lists(st.tuples(labels, labels), min_size=1, max_size=60))
def test_accuracy_is_micro_average(data):
    rep = compute_metrics(confusion(*zip(*data)))
    c = rep.matrix.counts
    tp = np.trace(c)
    micro_p = tp / c.sum(axis=0).sum()
    micro_r = tp / c.sum(axis=1).sum()
    assert rep.accuracy == pytest.approx(micro_p) == pytest.approx(micro_r)
    values = [rep.accuracy, rep.macro_precision, rep.macro_recall, rep.macro_f1, rep.coverage]
    values += [v for m in rep.per_class.values() for v in (m.precision, m.recall, m.f1)]
    assert all(0.0 <= v <= 1.0 for v in values)


def test_report_formats():
    rng = random.Random(1)
    golds = [rng.choice(CLASSES) for _ in range(40)]
    preds = [g if rng.random() < 0.8 else None for g in golds]
    rep = compute_metrics(confusion(preds, golds))
    doc = json.loads(rep.to_json())
    assert doc["confusion"]["order"] == ["negative", "neutral", "positive"]
    assert doc["abstentions"] + sum(map(sum, doc["confusion"]["counts"])) == 40
    table = rep.to_table("Naive Bayes").splitlines()
    assert table[0].split() == ["Model", "Accuracy", "Precision", "Recall", "F1", "Score", "Coverage"]
    assert table[1].startswith("Naive Bayes") and len(table) == 5
