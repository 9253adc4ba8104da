from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from depthguard.exceptions import ValidationError


@dataclass(frozen=True)
class ScoreEntry:
    id: str
    score: float
    is_adversarial: bool


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Anomaly scores paired with ground truth (adversarial = positive)."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for entry in self.entries:
            if not np.isfinite(entry.score):
                raise ValidationError("score is not finite", entry.id)

    @classmethod
    def from_arrays(cls, ids, scores, is_adversarial):
        return cls(
            tuple(
                ScoreEntry(str(i), float(s), bool(a))
                for i, s, a in zip(ids, scores, is_adversarial, strict=True)
            )
        )

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ScoreTable):
            return NotImplemented
        return self.entries == other.entries

    __hash__ = None

    @cached_property
    def scores(self):
        return np.array([e.score for e in self.entries], dtype=np.float64)

    @cached_property
    def labels(self):
        return np.array([e.is_adversarial for e in self.entries], dtype=bool)

    @property
    def n_adversarial(self):
        return int(self.labels.sum())

    @property
    def n_clean(self):
        return len(self) - self.n_adversarial

    def require_both_classes(self):
        if self.n_adversarial == 0 or self.n_clean == 0:
            raise ValidationError(
                "score table needs both clean and adversarial entries "
                f"(clean={self.n_clean}, adversarial={self.n_adversarial})"
            )
        return self

    def clean_scores(self):
        return self.scores[~self.labels]


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class PrPoint:
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True)
class DetectionReport:
    auroc: float
    aupr_in: float
    aupr_out: float
    fpr_at_r: float
    r: float
    err: float
    roc_points: tuple = ()
    pr_points: tuple = ()
    metadata: dict = field(default_factory=dict)

    def row(self):
        """Metrics in the order the comparison table prints them."""
        return {
            "AUROC": self.auroc,
            "FPR": self.fpr_at_r,
            "AUPR-IN": self.aupr_in,
            "AUPR-OUT": self.aupr_out,
            "Err": self.err,
        }
