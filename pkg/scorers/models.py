from dataclasses import dataclass

import numpy as np

from depthguard.exceptions import DimensionMismatchError, EmptyInputError, UnknownClassError, ValidationError


@dataclass(frozen=True, eq=False)
class GaussianClassModel:
    """Per-class mean and regularized precision (inverse covariance).

    All dicts are keyed by class label; ``ridges[y]`` is what was added to
    the diagonal of class y's covariance before inversion.
    """

    d: int
    means: dict
    precisions: dict
    ridges: dict
    class_counts: dict

    def __post_init__(self):
        if not self.means:
            raise EmptyInputError("a Gaussian class model needs at least one class")
        labels = set(self.means)
        for name in ("precisions", "ridges", "class_counts"):
            if set(getattr(self, name)) != labels:
                raise ValidationError(f"{name} must cover exactly the classes {sorted(labels)}")
        for label in labels:
            mean, precision = self.means[label], self.precisions[label]
            if mean.shape != (self.d,) or precision.shape != (self.d, self.d):
                raise DimensionMismatchError(f"class {label} parameters do not match d={self.d}")
            if not np.allclose(precision, precision.T, rtol=0, atol=1e-8):
                raise ValidationError(f"precision of class {label} is not symmetric")
            if self.ridges[label] < 0:
                raise ValidationError(f"ridge of class {label} is negative")
            mean.setflags(write=False)
            precision.setflags(write=False)

    @property
    def classes(self):
        return sorted(self.means)

    def require_class(self, label, record_id=None):
        if label not in self.means:
            raise UnknownClassError(
                f"predicted class {label} was not fitted (known: {self.classes})", record_id
            )

    def __eq__(self, other):
        if not isinstance(other, GaussianClassModel):
            return NotImplemented
        return (
            self.d == other.d
            and self.classes == other.classes
            and self.ridges == other.ridges
            and self.class_counts == other.class_counts
            and all(np.array_equal(self.means[y], other.means[y]) for y in self.classes)
            and all(np.array_equal(self.precisions[y], other.precisions[y]) for y in self.classes)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ClassConditionedHm:
    """One halfspace-mass model per class, all sharing d and hyper-parameters."""

    models: dict
    layer_tag: str = "L"
    # Base seed the per-class seeds were derived from.
    seed: int = 0

    def __post_init__(self):
        if not self.models:
            raise EmptyInputError("a class-conditioned model needs at least one class")
        first = next(iter(self.models.values()))
        for label, model in self.models.items():
            if model.d != first.d:
                raise DimensionMismatchError(f"class {label} model has d={model.d}, expected {first.d}")
            same = (model.params.K, model.params.n_s, model.params.lambda_) == (
                first.params.K,
                first.params.n_s,
                first.params.lambda_,
            )
            if not same:
                raise ValidationError(f"class {label} model was fitted with different parameters")

    @property
    def d(self):
        return next(iter(self.models.values())).d

    @property
    def classes(self):
        return sorted(self.models)

    def require_class(self, label, record_id=None):
        if label not in self.models:
            raise UnknownClassError(
                f"predicted class {label} was not fitted (known: {self.classes})", record_id
            )

    def __getitem__(self, label):
        return self.models[label]

    def __eq__(self, other):
        if not isinstance(other, ClassConditionedHm):
            return NotImplemented
        return (
            self.layer_tag == other.layer_tag
            and self.seed == other.seed
            and self.models == other.models
        )

    __hash__ = None
