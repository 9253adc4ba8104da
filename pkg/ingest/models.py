"""Domain types for embedding datasets and token log-probabilities.

These are plain immutable value objects, not database models: every
artifact of the toolkit lives in files.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from depthguard.compat import StrEnum
from depthguard.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    SplitSizeError,
    ValidationError,
)


class Tag(StrEnum):
    """Role of a record in the pipeline. Integer codes follow LEMB v1."""

    TRAIN = "train"
    CLEAN = "clean"
    ADVERSARIAL = "adversarial"

    @property
    def code(self):
        return TAG_CODES[self]

    @classmethod
    def from_code(cls, code):
        try:
            return CODE_TAGS[code]
        except KeyError:
            raise ValueError(f"unknown tag code {code}") from None


TAG_CODES = {Tag.TRAIN: 0, Tag.CLEAN: 1, Tag.ADVERSARIAL: 2}
CODE_TAGS = {code: tag for tag, code in TAG_CODES.items()}


def _frozen_vector(values):
    vector = np.array(values, copy=True)
    if vector.dtype.kind != "f":
        vector = vector.astype(np.float64)
    vector = np.ascontiguousarray(vector)
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    """One embedded input: ground truth, predicted label, vector and role."""

    id: str
    y: int | None
    y_hat: int
    emb: np.ndarray
    tag: Tag = Tag.TRAIN

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        emb = _frozen_vector(self.emb)
        if emb.ndim != 1 or emb.size == 0:
            raise ValidationError("emb must be a nonempty vector", self.id)
        if not np.all(np.isfinite(emb)):
            raise ValidationError("emb contains a non-finite value", self.id)
        if self.y_hat is None:
            raise ValidationError("y_hat is required", self.id)
        object.__setattr__(self, "emb", emb)

    @property
    def d(self):
        return self.emb.shape[0]

    def with_tag(self, tag):
        return EmbeddingRecord(self.id, self.y, self.y_hat, self.emb, Tag(tag))

    def __eq__(self, other):
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.y == other.y
            and self.y_hat == other.y_hat
            and self.tag == other.tag
            and np.array_equal(self.emb, other.emb)
        )

    def __hash__(self):
        return hash((self.id, self.y, self.y_hat, self.tag))


@dataclass(frozen=True, eq=False)
class EmbeddingDataset:
    """Ordered records sharing one dimension and one source layer."""

    d: int
    records: tuple
    layer_tag: str = "L"

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"dimension must be >= 1, got {self.d}")
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for record in self.records:
            if record.d != self.d:
                raise DimensionMismatchError(
                    f"emb has length {record.d}, dataset declares d={self.d}",
                    record.id,
                )
            if record.id in seen:
                raise ValidationError("duplicate record id", record.id)
            seen.add(record.id)

    @classmethod
    def from_records(cls, records, layer_tag="L"):
        records = tuple(records)
        if not records:
            raise EmptyInputError("dataset has no records")
        return cls(d=records[0].d, records=records, layer_tag=layer_tag)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingDataset):
            return NotImplemented
        return (
            self.d == other.d
            and self.layer_tag == other.layer_tag
            and self.records == other.records
        )

    __hash__ = None

    @cached_property
    def class_set(self):
        return frozenset(r.y for r in self.records if r.y is not None)

    @cached_property
    def embeddings(self):
        """All vectors stacked into an (n, d) read-only matrix."""
        if not self.records:
            return np.empty((0, self.d))
        matrix = np.vstack([r.emb for r in self.records])
        matrix.setflags(write=False)
        return matrix

    @property
    def ids(self):
        return [r.id for r in self.records]

    def require_nonempty(self):
        if not self.records:
            raise EmptyInputError("dataset has no records")
        return self

    def filter(self, *tags):
        """Sub-dataset keeping the records whose tag is one of `tags`."""
        wanted = {Tag(t) for t in tags}
        return EmbeddingDataset(
            d=self.d,
            records=tuple(r for r in self.records if r.tag in wanted),
            layer_tag=self.layer_tag,
        )

    def by_class(self):
        """Map each ground-truth label to the (n_y, d) matrix of its vectors."""
        groups = {}
        for record in self.records:
            if record.y is None:
                raise ValidationError("fitting requires a ground-truth label", record.id)
            groups.setdefault(record.y, []).append(record.emb)
        return {label: np.vstack(rows) for label, rows in sorted(groups.items())}


@dataclass(frozen=True, eq=False)
class TokenLogProbRecord:
    """Per-token log-probabilities of one input under an external language model."""

    id: str
    logps: np.ndarray
    tag: Tag | None = None

    def __post_init__(self):
        logps = _frozen_vector(self.logps)
        if logps.ndim != 1 or logps.size == 0:
            raise ValidationError("logps must be a nonempty vector", self.id)
        if not np.all(np.isfinite(logps)):
            raise ValidationError("logps contains a non-finite value", self.id)
        if np.any(logps > 0):
            raise ValidationError("log-probabilities must be <= 0", self.id)
        object.__setattr__(self, "logps", logps)
        if self.tag is not None:
            object.__setattr__(self, "tag", Tag(self.tag))


@dataclass(frozen=True)
class SplitSpec:
    """Sizes of the attack-source subset X1 and the clean subset X2."""

    seed: int
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise SplitSizeError(f"n1 and n2 must be >= 1, got n1={self.n1}, n2={self.n2}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def check_against(self, size):
        if self.n1 + self.n2 > size:
            raise SplitSizeError(
                f"n1 + n2 = {self.n1} + {self.n2} = {self.n1 + self.n2} "
                f"exceeds the test set size {size}"
            )
