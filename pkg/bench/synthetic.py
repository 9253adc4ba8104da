"""Centered Gaussian samples whose covariance is a random Wishart matrix."""

import numpy as np
from scipy.stats import wishart

from depthguard.exceptions import ValidationError
from ingest.splits import split_generator


def _draw_covariance(d, rng):
    # Wishart with d degrees of freedom and scale I / d, i.e. G^T G / d.
    sigma = wishart(df=d, scale=np.eye(d) / d).rvs(random_state=rng)
    return np.atleast_2d(sigma)


def _symmetric_root(sigma):
    eigenvalues, eigenvectors = np.linalg.eigh(sigma)
    return (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.T


def wishart_covariance(d, seed):
    """The covariance ``gen_wishart_gaussian(d, n, seed)`` samples from."""
    if d < 1:
        raise ValidationError(f"d must be >= 1, got {d}")
    return _draw_covariance(d, split_generator(seed))


def gen_wishart_gaussian(d, n, seed):
    """``n`` points of N(0, Sigma) in R^d, Sigma Wishart; an (n, d) array."""
    if d < 1 or n < 1:
        raise ValidationError(f"d and n must be >= 1, got d={d}, n={n}")
    rng = split_generator(seed)
    sigma = _draw_covariance(d, rng)
    return rng.standard_normal((n, d)) @ _symmetric_root(sigma)
