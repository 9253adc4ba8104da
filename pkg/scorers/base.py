"""The anomaly-scorer contract.

Every scorer returns an anomaly score: higher means more anomalous. Depth
scores, where higher means more typical, are negated to fit.
"""

import abc
import logging

import numpy as np

from depthguard.exceptions import DimensionMismatchError

logger = logging.getLogger(__name__)


class AnomalyScorer(abc.ABC):
    """Base class for fitted, deterministic scorers."""

    name = None

    @abc.abstractmethod
    def score(self, record):
        """Anomaly score of one record."""

    def score_many(self, records):
        return np.array([self.score(r) for r in records], dtype=np.float64)


class ClassConditionedScorer(AnomalyScorer):
    """Scores an embedding against the fitted state of its predicted class."""

    def __init__(self, model):
        self.model = model

    @abc.abstractmethod
    def score_class(self, label, embeddings):
        """Scores of the (n, d) ``embeddings`` against class ``label``."""

    def check(self, record):
        if record.d != self.model.d:
            raise DimensionMismatchError(
                f"embedding has d={record.d}, model expects d={self.model.d}", record.id
            )
        self.model.require_class(record.y_hat, record.id)

    def score(self, record):
        self.check(record)
        return float(self.score_class(record.y_hat, record.emb[None, :])[0])

    def score_many(self, records):
        """Batch scoring, grouped by predicted class; output keeps input order."""
        records = list(records)
        for record in records:
            self.check(record)
        scores = np.empty(len(records))
        groups = {}
        for i, record in enumerate(records):
            groups.setdefault(record.y_hat, []).append(i)
        for label, index in groups.items():
            embeddings = np.vstack([records[i].emb for i in index])
            scores[index] = self.score_class(label, embeddings)
            logger.debug(f"{self.name}: scored {len(index)} records against class {label}")
        return scores
