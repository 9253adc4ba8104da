"""Class-conditioned halfspace-mass detector score.

An embedding with predicted class y is scored by the negated
halfspace-mass depth of the embedding with respect to the training
embeddings of class y, so deeper (more regular) inputs score lower.
"""

import logging

import numpy as np

from depth.halfspace_mass import fit_hm, score_hm, score_hm_batch
from depthguard.exceptions import EmptyInputError

from .base import ClassConditionedScorer
from .models import ClassConditionedHm

logger = logging.getLogger(__name__)


def class_seed(seed, label):
    """Seed of class ``label``'s model: first 64-bit word of SeedSequence([seed, label])."""
    sequence = np.random.SeedSequence([seed, label % 2**32])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def fit_larousse(ds, params, n_jobs=1):
    """Fit one halfspace-mass model per ground-truth class of ``ds``."""
    groups = ds.by_class()
    if not groups:
        raise EmptyInputError("no labelled records to fit")
    models = {}
    for label, X in groups.items():
        models[label] = fit_hm(X, params.with_seed(class_seed(params.seed, label)), n_jobs=n_jobs)
        logger.debug(f"class {label}: fitted on {X.shape[0]} points")
    logger.info(
        f"Fitted halfspace-mass detector on {len(models)} classes "
        f"(d={ds.d}, K={params.K}, n_s={params.n_s}, lambda={params.lambda_})"
    )
    return ClassConditionedHm(models=models, layer_tag=ds.layer_tag, seed=params.seed)


def score_larousse(model, emb, y_hat):
    """Negated depth of ``emb`` in class ``y_hat``; lies in [-1, 0]."""
    model.require_class(y_hat)
    return -score_hm(model[y_hat], emb)


class DepthScorer(ClassConditionedScorer):
    name = "hm"

    def score_class(self, label, embeddings):
        return -score_hm_batch(self.model[label], embeddings)
