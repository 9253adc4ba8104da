"""Threshold-free and fixed-threshold detection metrics.

Scores follow the anomaly orientation: adversarial entries are the
positives and a threshold flags every entry whose score is >= the threshold.
"""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import average_precision_score, roc_auc_score

from depthguard.compat import StrEnum
from depthguard.exceptions import ValidationError

from .models import DetectionReport, PrPoint, RocPoint

logger = logging.getLogger(__name__)

DEFAULT_R = 0.90
METRIC_FIELDS = ("auroc", "fpr_at_r", "aupr_in", "aupr_out", "err")


class Positive(StrEnum):
    ADVERSARIAL_IN = "adversarial_in"
    CLEAN_OUT = "clean_out"


@dataclass(frozen=True)
class ThresholdSweep:
    """Detection counts at every distinct score, thresholds descending.

    ``tps[i]`` / ``fps[i]`` count adversarial / clean entries with
    score >= ``thresholds[i]``.
    """

    thresholds: np.ndarray
    tps: np.ndarray
    fps: np.ndarray
    n_pos: int
    n_neg: int

    @property
    def tpr(self):
        return self.tps / self.n_pos

    @property
    def fpr(self):
        return self.fps / self.n_neg


def threshold_sweep(t):
    t.require_both_classes()
    order = np.argsort(-t.scores, kind="mergesort")
    scores = t.scores[order]
    labels = t.labels[order]
    # Last position of every run of tied scores.
    last = np.r_[np.flatnonzero(np.diff(scores)), scores.size - 1]
    tps = np.cumsum(labels)[last]
    fps = last + 1 - tps
    return ThresholdSweep(
        thresholds=scores[last],
        tps=tps,
        fps=fps,
        n_pos=t.n_adversarial,
        n_neg=t.n_clean,
    )


def auroc(t):
    """P(adversarial score > clean score), ties counted one half."""
    t.require_both_classes()
    return float(roc_auc_score(t.labels, t.scores))


def aupr(t, positive=Positive.ADVERSARIAL_IN):
    """Step-wise area under the precision-recall curve.

    ``adversarial_in`` ranks by anomaly score with adversarial positives;
    ``clean_out`` ranks by negated score with clean positives.
    """
    t.require_both_classes()
    if Positive(positive) is Positive.ADVERSARIAL_IN:
        return float(average_precision_score(t.labels, t.scores))
    return float(average_precision_score(~t.labels, -t.scores))


def _check_rate(r):
    if not 0 < r <= 1:
        raise ValidationError(f"target TPR must lie in (0, 1], got {r}")


def fpr_at_tpr(t, r=DEFAULT_R):
    """Clean flag rate at the highest threshold that detects a fraction >= r of attacks."""
    _check_rate(r)
    sweep = threshold_sweep(t)
    i = int(np.argmax(sweep.tpr >= r))
    return float(sweep.fpr[i])


def err(t):
    """Lowest misclassification rate over all thresholds, +/-inf included."""
    sweep = threshold_sweep(t)
    errors = sweep.fps + (sweep.n_pos - sweep.tps)
    best = min(int(errors.min()), sweep.n_pos)
    return best / (sweep.n_pos + sweep.n_neg)


def roc_points(sweep):
    return tuple(
        RocPoint(float(th), float(fpr), float(tpr))
        for th, fpr, tpr in zip(sweep.thresholds, sweep.fpr, sweep.tpr)
    )


def pr_points(sweep):
    precision = sweep.tps / (sweep.tps + sweep.fps)
    return tuple(
        PrPoint(float(th), float(p), float(rec))
        for th, p, rec in zip(sweep.thresholds, precision, sweep.tpr)
    )


def full_report(t, r=DEFAULT_R, metadata=None):
    _check_rate(r)
    sweep = threshold_sweep(t)
    report = DetectionReport(
        auroc=auroc(t),
        aupr_in=aupr(t, Positive.ADVERSARIAL_IN),
        aupr_out=aupr(t, Positive.CLEAN_OUT),
        fpr_at_r=fpr_at_tpr(t, r),
        r=r,
        err=err(t),
        roc_points=roc_points(sweep),
        pr_points=pr_points(sweep),
        metadata=dict(metadata or {}),
    )
    logger.info(
        f"AUROC={report.auroc:.4f} FPR@{r:g}={report.fpr_at_r:.4f} "
        f"AUPR-IN={report.aupr_in:.4f} AUPR-OUT={report.aupr_out:.4f} Err={report.err:.4f} "
        f"(clean={t.n_clean}, adversarial={t.n_adversarial})"
    )
    return report


def summarize_reports(reports):
    """Mean and standard deviation of each metric over several runs (e.g. seeds)."""
    reports = list(reports)
    if not reports:
        raise ValidationError("nothing to summarize")
    summary = {}
    for name in METRIC_FIELDS:
        values = np.array([getattr(report, name) for report in reports])
        summary[name] = {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "n": int(values.size),
        }
    return summary
