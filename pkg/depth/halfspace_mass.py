"""Monte Carlo approximation of the halfspace-mass depth.

Fitting draws K random closed halfspaces and records how much of a random
sub-sample of the data falls on either side; scoring averages, over the K
halfspaces, the mass of the side a query lands on. Higher depth means the
query sits deeper inside the data.

Randomness: direction k draws everything it needs (sub-sample, direction,
threshold, in that order) from
``Generator(PCG64(SeedSequence(seed, spawn_key=(k,))))``. The streams do not
depend on each other, so the fitted model is the same whatever the
evaluation order or thread count.
"""

import logging

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from depthguard.exceptions import DimensionMismatchError, EmptyInputError, ValidationError

from .models import HalfspaceMassModel

logger = logging.getLogger(__name__)

DEFAULT_BLOCK = 4_000_000


def _block_size():
    return getattr(settings, "DEPTHGUARD", {}).get("PROJECTION_BLOCK", DEFAULT_BLOCK)


def as_points(points, d=None, what="points"):
    """Validate ``points`` as a finite (n, d) float64 matrix."""
    matrix = np.asarray(points, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise EmptyInputError(f"{what} must be a nonempty list of vectors")
    if d is not None and matrix.shape[1] != d:
        raise DimensionMismatchError(f"{what} have dimension {matrix.shape[1]}, expected {d}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError(f"{what} contain non-finite values")
    return matrix


def project(points, directions):
    """Inner products <x_i, u_k> as an (n, K) matrix.

    Each entry is the sum of the elementwise products along the last axis
    of a contiguous block, so its value depends only on its own (point,
    direction) pair. Fitting and scoring share this kernel, which keeps a
    training point exactly on its own threshold when the two meet.
    """
    n, d = points.shape
    K = directions.shape[0]
    out = np.empty((n, K))
    block = max(_block_size(), d)
    row_step = max(1, min(n, block // d))
    col_step = max(1, block // (row_step * d))
    for r0 in range(0, n, row_step):
        rows = points[r0 : r0 + row_step, None, :]
        for c0 in range(0, K, col_step):
            out[r0 : r0 + row_step, c0 : c0 + col_step] = (
                rows * directions[None, c0 : c0 + col_step, :]
            ).sum(axis=-1)
    return out


def direction_generator(seed, k):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,))))


def _fit_direction(points, n_sub, lambda_, rng):
    n, d = points.shape
    if n > n_sub:
        index = rng.choice(n, size=n_sub, replace=False)
    else:
        index = np.arange(n)
    u = rng.standard_normal(d)
    norm = np.linalg.norm(u)
    while norm == 0.0:
        u = rng.standard_normal(d)
        norm = np.linalg.norm(u)
    u /= norm

    p = project(points[index], u[None, :])[:, 0]
    lo, hi = p.min(), p.max()
    mid = (hi + lo) / 2
    spread = hi - lo
    if spread == 0.0:
        kappa = mid
    else:
        half_width = lambda_ / 2 * spread
        kappa = rng.uniform(mid - half_width, mid + half_width)
    left = np.count_nonzero(p < kappa)
    return u, kappa, left / n_sub, (n_sub - left) / n_sub, index


def _fit_block(points, params, n_sub, ks):
    rows = []
    for k in ks:
        rows.append(_fit_direction(points, n_sub, params.lambda_, direction_generator(params.seed, int(k))))
    return rows


def fit_hm(points, params, n_jobs=1, keep_subsamples=False):
    """Fit K halfspaces on ``points`` (an (n, d) array or list of vectors).

    ``n_jobs > 1`` spreads directions over a thread pool; the result is
    identical to the sequential fit. ``keep_subsamples`` stores the row
    indices each direction saw, for mass-consistency checks.
    """
    X = as_points(points)
    n, d = X.shape
    if params.lambda_ > 1:
        logger.warning(
            f"lambda={params.lambda_} > 1 lets thresholds leave the projected range "
            "more often; halfspaces may carry no training mass"
        )
    n_sub = min(params.n_s, n)
    ks = np.arange(params.K)

    if n_jobs > 1 and params.K > 1:
        blocks = np.array_split(ks, min(params.K, n_jobs * 4))
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_fit_block)(X, params, n_sub, block) for block in blocks
        )
        rows = [row for part in parts for row in part]
    else:
        rows = _fit_block(X, params, n_sub, ks)

    directions, thresholds, left, right, indices = zip(*rows)
    model = HalfspaceMassModel(
        d=d,
        directions=np.vstack(directions),
        thresholds=np.asarray(thresholds, dtype=np.float64),
        mass_left=np.asarray(left, dtype=np.float64),
        mass_right=np.asarray(right, dtype=np.float64),
        params=params,
        fit_size=n,
        subsample_indices=tuple(indices) if keep_subsamples else None,
    )
    logger.debug(f"Fitted {params.K} halfspaces on n={n}, d={d} (sub-sample {n_sub})")
    return model


def score_hm_batch(model, xs):
    """Depth of every row of ``xs``; entry i equals ``score_hm(model, xs[i])``."""
    X = as_points(xs, d=model.d, what="queries")
    n = X.shape[0]
    scores = np.empty(n)
    row_step = max(1, _block_size() // max(model.K, 1))
    for r0 in range(0, n, row_step):
        p = project(X[r0 : r0 + row_step], model.directions)
        masses = np.where(p < model.thresholds, model.mass_left, model.mass_right)
        scores[r0 : r0 + row_step] = masses.mean(axis=1)
    return scores


def score_hm(model, x):
    """Halfspace-mass depth of one vector, in [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatchError(f"expected a single vector, got shape {x.shape}")
    return float(score_hm_batch(model, x[None, :])[0])
