"""News and social-media sentiment to graded Forex trading signals.

Two sentiment engines (a valence lexicon and a Gaussian naive Bayes
classifier) feed a fusion rule confirmed by SMA and RSI; the resulting
signals are replayed in a bar-level backtest.
"""

__version__ = "0.1.0"
