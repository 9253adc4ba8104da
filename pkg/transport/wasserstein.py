"""Exact Wasserstein-1 distance between equal-size empirical point clouds.

The distance is the optimal assignment cost on the Euclidean cost matrix,
solved exactly by ``scipy.optimize.linear_sum_assignment``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from depthguard.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    SizeMismatchError,
    ValidationError,
)
from ingest.splits import split_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Uniformly weighted empirical measure over the rows of ``points``."""

    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] == 0:
            raise EmptyInputError("point cloud must be a nonempty (n, d) array")
        if not np.all(np.isfinite(points)):
            raise ValidationError("point cloud contains a non-finite value")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_dataset(cls, ds):
        return cls(ds.require_nonempty().embeddings)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class LayerDistance:
    layer_tag: str
    w1: float
    w1_train_clean: float | None = None
    w1_train_adv: float | None = None


def _as_cloud(cloud):
    return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud)


def w1_exact(a, b):
    """Minimal average Euclidean transport cost between two equal-size clouds."""
    a, b = _as_cloud(a), _as_cloud(b)
    if a.d != b.d:
        raise DimensionMismatchError(f"clouds live in different dimensions ({a.d} vs {b.d})")
    if a.n != b.n:
        raise SizeMismatchError(f"clouds must have equal sizes, got {a.n} and {b.n}")
    cost = cdist(a.points, b.points, metric="euclidean")
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / a.n)


def balance_clouds(a, b, seed=0):
    """Sub-sample the larger cloud without replacement down to the smaller size.

    Kept rows stay in source order; the choice depends only on ``seed``.
    """
    a, b = _as_cloud(a), _as_cloud(b)
    if a.n == b.n:
        return a, b
    rng = split_generator(seed)
    size = min(a.n, b.n)
    if a.n > size:
        a = PointCloud(a.points[np.sort(rng.choice(a.n, size=size, replace=False))])
    else:
        b = PointCloud(b.points[np.sort(rng.choice(b.n, size=size, replace=False))])
    logger.debug(f"Balanced clouds to {size} points each (seed={seed})")
    return a, b


def layer_discrimination(layers):
    """W1 between the clean and adversarial cloud of each layer, input order kept."""
    result = []
    for layer_tag, clean, adv in layers:
        w1 = w1_exact(clean, adv)
        logger.info(f"layer {layer_tag}: W1(clean, adversarial) = {w1:.6g}")
        result.append((layer_tag, w1))
    return result


def layer_triad(layer_tag, clean, adv, train=None, seed=0):
    """W1(clean, adv) plus, when a training cloud is given, its distances to both.

    The training cloud is balanced against each test cloud before matching.
    """
    w1 = w1_exact(clean, adv)
    if train is None:
        return LayerDistance(layer_tag, w1)
    w1_train_clean = w1_exact(*balance_clouds(train, clean, seed))
    w1_train_adv = w1_exact(*balance_clouds(train, adv, seed))
    logger.info(
        f"layer {layer_tag}: W1(clean, adv)={w1:.6g} "
        f"W1(train, clean)={w1_train_clean:.6g} W1(train, adv)={w1_train_adv:.6g}"
    )
    return LayerDistance(layer_tag, w1, w1_train_clean, w1_train_adv)
