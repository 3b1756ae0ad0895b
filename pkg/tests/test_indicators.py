from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fxsignal.indicators import InsufficientHistory, rsi, sma


def wilder_oracle(closes, period):
    """Exact rational Wilder recursion, one value per defined index."""
    c = [Fraction(x) for x in closes]
    deltas = [b - a for a, b in zip(c, c[1:])]
    gains = [max(d, 0) for d in deltas]
    losses = [max(-d, 0) for d in deltas]
    g = sum(gains[:period]) / period
    l_ = sum(losses[:period]) / period
    out = []

    def value(g, l_):
        if l_ == 0:
            return Fraction(50) if g == 0 else Fraction(100)
        return 100 - Fraction(100) / (1 + g / l_)

    out.append(value(g, l_))
    for k in range(period, len(deltas)):
        g = (g * (period - 1) + gains[k]) / period
        l_ = (l_ * (period - 1) + losses[k]) / period
        out.append(value(g, l_))
    return out


class TestSma:
    def test_constant(self):
        s = sma([1.2] * 5, 3)
        np.testing.assert_allclose(s.defined, [1.2] * 3, rtol=0, atol=1e-15)

    def test_hand_means(self):
        s = sma([1, 2, 3, 4], 2)
        assert s.first == 1
        assert list(s.defined) == [1.5, 2.5, 3.5]
        assert np.isnan(s.values[0]) and s.at(0) is None

    def test_insufficient(self):
        with pytest.raises(InsufficientHistory, match="insufficient history"):
            sma([1.0], 2)

    @pytest.mark.parametrize("period", [0, -1, 2.5])
    def test_bad_period(self, period):
        with pytest.raises(ValueError):
            sma([1.0, 2.0, 3.0], period)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.5, 2.0), min_size=1, max_size=80), st.integers(1, 20))
    def test_windowed_mean(self, closes, period):
        if len(closes) < period:
            return
        s = sma(closes, period)
        for i in range(period - 1, len(closes)):
            assert abs(s.values[i] - sum(closes[i - period + 1:i + 1]) / period) <= 1e-12

    def test_prefix_does_not_change_values(self):
        rng = np.random.default_rng(3)
        closes = 1 + np.cumsum(rng.normal(0, 0.01, 200)) * 0.1
        full, tail = sma(closes, 10), sma(closes[50:], 10)
        np.testing.assert_allclose(full.values[59:], tail.values[9:], rtol=0, atol=1e-12)


class TestRsi:
    def test_increasing_is_100(self):
        assert set(rsi(np.arange(1.0, 40.0), 14).defined) == {100.0}

    def test_decreasing_is_0(self):
        assert set(rsi(np.arange(40.0, 1.0, -1), 14).defined) == {0.0}

    def test_flat_is_50(self):
        assert set(rsi([1.1] * 30, 14).defined) == {50.0}

    def test_worked_example_against_oracle(self):
        closes = [1.0, 1.1, 1.05, 1.15]
        s = rsi(closes, 2)
        assert s.first == 2
        expected = [float(v) for v in wilder_oracle(closes, 2)]
        np.testing.assert_allclose(s.defined, expected, rtol=0, atol=1e-9)
        assert s.defined[0] == pytest.approx(200 / 3, abs=1e-6)
        assert s.defined[1] == pytest.approx(600 / 7, abs=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_exact_recursion(self, seed):
        rng = np.random.default_rng(seed)
        closes = np.round(1.1 + np.cumsum(rng.normal(0, 0.002, 60)), 5)
        expected = [float(v) for v in wilder_oracle(closes.tolist(), 14)]
        np.testing.assert_allclose(rsi(closes, 14).defined, expected, rtol=0, atol=1e-9)

    def test_insufficient(self):
        with pytest.raises(InsufficientHistory):
            rsi([1.0] * 14, 14)

    @pytest.mark.parametrize("seed", range(3))
    def test_bounded_on_random_walks(self, seed):
        rng = np.random.default_rng(seed)
        closes = np.exp(np.cumsum(rng.normal(0, 0.01, 10_000)))
        d = rsi(closes, 14).defined
        assert np.all((d >= 0) & (d <= 100))

    def test_prefix_memory_decays(self):
        rng = np.random.default_rng(0)
        closes = np.exp(np.cumsum(rng.normal(0, 0.01, 600)))
        ref = rsi(closes, 14).values
        devs = []
        for start in (400, 350, 300, 250, 200, 150):
            vals = np.full(len(closes), np.nan)
            vals[start:] = rsi(closes[start:], 14).values
            devs.append(np.max(np.abs(vals[414:] - ref[414:])))
        assert all(a > b for a, b in zip(devs, devs[1:]))
        assert devs[-1] < 1e-6
