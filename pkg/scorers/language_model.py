import numpy as np

from .base import AnomalyScorer


def score_lm(rec):
    """Negative log-likelihood of the token sequence: -sum(logps)."""
    return 0.0 - float(np.sum(rec.logps))


class LanguageModelScorer(AnomalyScorer):
    """Perplexity-style baseline over precomputed token log-probabilities."""

    name = "lm"

    def score(self, record):
        return score_lm(record)
