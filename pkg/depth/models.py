from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from depthguard.exceptions import ValidationError

MAX_LAMBDA = 2.0


@dataclass(frozen=True)
class HmHyperParams:
    """Monte Carlo settings of the halfspace-mass approximation.

    K directions are drawn; each one sees a sub-sample of at most ``n_s``
    points, and its threshold is drawn within ``lambda_`` times the projected
    range around the projected midpoint.
    """

    K: int = 10000
    n_s: int = 32
    lambda_: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValidationError(f"K must be >= 1, got {self.K}")
        if self.n_s < 1:
            raise ValidationError(f"n_s must be >= 1, got {self.n_s}")
        if not 0 < self.lambda_ <= MAX_LAMBDA:
            raise ValidationError(f"lambda must lie in (0, {MAX_LAMBDA}], got {self.lambda_}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults from ``settings.DEPTHGUARD``; ``None`` overrides are ignored."""
        conf = settings.DEPTHGUARD
        values = {
            "K": conf["HM_K"],
            "n_s": conf["HM_NS"],
            "lambda_": conf["HM_LAMBDA"],
            "seed": conf["HM_SEED"],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_seed(self, seed):
        return HmHyperParams(K=self.K, n_s=self.n_s, lambda_=self.lambda_, seed=seed)

    def as_dict(self):
        return {"K": self.K, "n_s": self.n_s, "lambda": self.lambda_, "seed": self.seed}


@dataclass(frozen=True)
class Halfspace:
    """Closed halfspace pair {<x, u> < kappa} / {<x, u> >= kappa} with its masses."""

    u: np.ndarray
    kappa: float
    m_left: float
    m_right: float


@dataclass(frozen=True, eq=False)
class HalfspaceMassModel:
    """Fitted halfspaces, stored column-wise for vectorized scoring.

    Row k of ``directions`` is u_k; ``thresholds[k]`` is kappa_k and
    ``mass_left[k]`` / ``mass_right[k]`` are the sub-sample fractions strictly
    left of / at-or-right of kappa_k.
    """

    d: int
    directions: np.ndarray
    thresholds: np.ndarray
    mass_left: np.ndarray
    mass_right: np.ndarray
    params: HmHyperParams
    fit_size: int
    # Debug only: sub-sample row indices per direction, never serialized.
    subsample_indices: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        K = self.params.K
        if self.directions.shape != (K, self.d):
            raise ValidationError(
                f"directions have shape {self.directions.shape}, expected {(K, self.d)}"
            )
        for name in ("thresholds", "mass_left", "mass_right"):
            if getattr(self, name).shape != (K,):
                raise ValidationError(f"{name} must hold {K} values")
        if not np.allclose(np.linalg.norm(self.directions, axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValidationError("directions must be unit vectors")
        masses = np.concatenate([self.mass_left, self.mass_right])
        if np.any(masses < 0) or np.any(masses > 1):
            raise ValidationError("halfspace masses must lie in [0, 1]")
        if not np.allclose(self.mass_left + self.mass_right, 1.0, rtol=0, atol=1e-9):
            raise ValidationError("left and right masses must sum to 1")
        for name in ("directions", "thresholds", "mass_left", "mass_right"):
            getattr(self, name).setflags(write=False)

    @property
    def K(self):
        return self.params.K

    @property
    def halfspaces(self):
        return [
            Halfspace(
                u=self.directions[k],
                kappa=float(self.thresholds[k]),
                m_left=float(self.mass_left[k]),
                m_right=float(self.mass_right[k]),
            )
            for k in range(self.K)
        ]

    def __eq__(self, other):
        if not isinstance(other, HalfspaceMassModel):
            return NotImplemented
        return (
            self.d == other.d
            and self.params == other.params
            and self.fit_size == other.fit_size
            and np.array_equal(self.directions, other.directions)
            and np.array_equal(self.thresholds, other.thresholds)
            and np.array_equal(self.mass_left, other.mass_left)
            and np.array_equal(self.mass_right, other.mass_right)
        )

    __hash__ = None
