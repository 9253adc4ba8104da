"""Class-conditioned Mahalanobis baseline.

The score of an embedding z with predicted class y is
(z - mu_y)^T (Sigma_y + ridge_y I)^{-1} (z - mu_y): the precision matrix,
not Sigma_y itself, sits in the quadratic form.
"""

import logging

import numpy as np
from django.conf import settings
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from sklearn.covariance import EmpiricalCovariance

from depthguard.exceptions import EmptyInputError, FactorizationError, InsufficientSamplesError, ValidationError

from .base import ClassConditionedScorer
from .models import GaussianClassModel

logger = logging.getLogger(__name__)


def default_ridge(covariance, relative=None):
    """Scale-free ridge: ``relative * trace(covariance) / d``."""
    if relative is None:
        relative = settings.DEPTHGUARD["MAHALANOBIS_RELATIVE_RIDGE"]
    return float(relative * np.trace(covariance) / covariance.shape[0])


def regularized_precision(covariance, ridge, label):
    """Inverse of ``covariance + ridge * I`` through a Cholesky factorization."""
    d = covariance.shape[0]
    if ridge == 0 and np.linalg.matrix_rank(covariance, hermitian=True) < d:
        raise FactorizationError(label, ridge)
    try:
        factor = cho_factor(covariance + ridge * np.eye(d), lower=True)
    except LinAlgError:
        raise FactorizationError(label, ridge) from None
    precision = cho_solve(factor, np.eye(d))
    return (precision + precision.T) / 2


def fit_class_gaussian(X, label=0, ridge=None, relative_ridge=None):
    """Mean, regularized precision and ridge of the (n, d) samples ``X`` of one class.

    The covariance uses the maximum-likelihood denominator n. With
    ``ridge=None`` the class gets ``default_ridge`` of its own covariance.
    """
    if X.shape[0] < 2:
        raise InsufficientSamplesError(
            f"class {label} has {X.shape[0]} sample(s); at least 2 are required"
        )
    estimator = EmpiricalCovariance(store_precision=False, assume_centered=False)
    estimator.fit(np.asarray(X, dtype=np.float64))
    covariance = estimator.covariance_
    class_ridge = default_ridge(covariance, relative_ridge) if ridge is None else float(ridge)
    mean = np.asarray(estimator.location_, dtype=np.float64)
    return mean, regularized_precision(covariance, class_ridge, label), class_ridge


def fit_mahalanobis(ds, ridge=None, relative_ridge=None):
    """Fit one Gaussian per ground-truth class of ``ds``."""
    if ridge is not None and ridge < 0:
        raise ValidationError(f"ridge must be >= 0, got {ridge}")
    groups = ds.by_class()
    if not groups:
        raise EmptyInputError("no labelled records to fit")

    means, precisions, ridges, counts = {}, {}, {}, {}
    for label, X in groups.items():
        means[label], precisions[label], ridges[label] = fit_class_gaussian(
            X, label, ridge, relative_ridge
        )
        counts[label] = int(X.shape[0])
        logger.debug(f"class {label}: n={counts[label]}, ridge={ridges[label]:.3g}")

    logger.info(f"Fitted Mahalanobis model on {len(means)} classes (d={ds.d})")
    return GaussianClassModel(
        d=ds.d, means=means, precisions=precisions, ridges=ridges, class_counts=counts
    )


def quadratic_form(mean, precision, embeddings):
    """(z - mean)^T precision (z - mean) for every row z, clamped at 0."""
    diff = np.asarray(embeddings, dtype=np.float64) - mean
    return np.maximum(((diff @ precision) * diff).sum(axis=1), 0.0)


def mahalanobis_scores(model, label, embeddings):
    return quadratic_form(model.means[label], model.precisions[label], embeddings)


def score_mahalanobis(model, emb, y_hat):
    """Squared Mahalanobis distance of ``emb`` to class ``y_hat``; 0 at the mean."""
    model.require_class(y_hat)
    emb = np.asarray(emb, dtype=np.float64)
    return float(mahalanobis_scores(model, y_hat, emb[None, :])[0])


class MahalanobisScorer(ClassConditionedScorer):
    name = "mahalanobis"

    def score_class(self, label, embeddings):
        return mahalanobis_scores(self.model, label, embeddings)
