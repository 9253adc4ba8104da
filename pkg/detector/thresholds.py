"""Thresholding of anomaly scores and calibration of the threshold on clean data."""

import logging
import math

import numpy as np
import pandas as pd

from depthguard.exceptions import EmptyInputError, ValidationError

from .models import Calibration, Decision, Threshold

logger = logging.getLogger(__name__)

DECISION_COLUMNS = ["id", "score", "flagged"]


def decide(scores, gamma):
    """Flag every entry of ``scores`` whose score is >= ``gamma`` (ties flag)."""
    if not isinstance(gamma, Threshold):
        gamma = Threshold(float(gamma))
    decisions = [Decision(e.id, e.score, gamma.flags(e.score)) for e in scores.entries]
    logger.info(f"Flagged {sum(d.flagged for d in decisions)} of {len(decisions)} entries at {gamma}")
    return decisions


def calibrate_gamma(clean_scores, q):
    """Empirical q-quantile of clean scores, lower order statistic.

    gamma is the ceil(q * n)-th smallest clean score (1-based), so at most a
    fraction 1 - q + 1/n of the calibration scores is flagged.
    """
    if not 0 < q < 1:
        raise ValidationError(f"calibration quantile must lie in (0, 1), got {q}")
    values = np.sort(np.asarray(clean_scores, dtype=np.float64))
    if values.size == 0:
        raise EmptyInputError("no clean scores to calibrate on")
    # Rounding keeps q * n = 90.00000000000001 from moving to the next statistic.
    rank = max(1, math.ceil(round(q * values.size, 9)))
    gamma = float(values[rank - 1])
    logger.info(f"Calibrated gamma={gamma!r} as order statistic {rank} of {values.size} (q={q})")
    return Threshold(gamma, Calibration.CLEAN_QUANTILE, q)


def write_decisions(decisions, path):
    frame = pd.DataFrame(
        {
            "id": [d.id for d in decisions],
            "score": [d.score for d in decisions],
            "flagged": [int(d.flagged) for d in decisions],
        },
        columns=DECISION_COLUMNS,
    )
    frame.to_csv(path, index=False, lineterminator="\n")
