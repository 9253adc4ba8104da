"""Readers and writers for embedding datasets and token log-prob files.

LEMB v1 (little-endian)::

    magic      4 bytes  "LEMB"
    version    u32      1
    count      u64      number of records
    dimension  u32      d
    layer_tag  u16 length + UTF-8 bytes
    records    count x (id: u16 length + UTF-8, y: i32 (-1 = absent),
                        y_hat: i32, tag: u8 (0 train, 1 clean, 2 adversarial),
                        emb: d x float32)

JSONL: an optional header object ``{"d": ..., "layer_tag": ...}`` followed by
one object per record with keys id, y (nullable), y_hat, tag, emb. Floats are
written with ``repr`` so they read back to the same value.
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np
from rest_framework import serializers

from depthguard.compat import StrEnum
from depthguard.exceptions import EmptyInputError, FormatError, ValidationError

from .models import EmbeddingDataset, EmbeddingRecord, Tag
from .serializers import (
    DatasetHeaderSerializer,
    EmbeddingRecordSerializer,
    TokenLogProbSerializer,
)

logger = logging.getLogger(__name__)

MAGIC = b"LEMB"
VERSION = 1
ABSENT_LABEL = -1

_HEADER = struct.Struct("<4sIQI")
_U16 = struct.Struct("<H")
_LABELS = struct.Struct("<iiB")


class DatasetFormat(StrEnum):
    BINARY = "binary"
    JSONL = "jsonl"

    @classmethod
    def for_path(cls, path):
        """JSON-lines for ``.jsonl``/``.json`` files, LEMB binary otherwise."""
        suffix = Path(path).suffix.lower()
        return cls.JSONL if suffix in (".jsonl", ".json") else cls.BINARY


class ByteCursor:
    """Bounds-checked reader over an in-memory buffer that tracks its offset."""

    def __init__(self, buffer):
        self.buffer = buffer
        self.offset = 0

    def take(self, size, what):
        end = self.offset + size
        if end > len(self.buffer):
            raise FormatError(
                f"truncated {what}: needs {size} bytes, "
                f"{len(self.buffer) - self.offset} left",
                self.offset,
            )
        chunk = self.buffer[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, layout, what):
        return layout.unpack(self.take(layout.size, what))

    def text(self, what):
        start = self.offset
        (length,) = self.unpack(_U16, f"{what} length")
        raw = self.take(length, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"{what} is not valid UTF-8", start) from None


def _pack_text(value, what, record_id=None):
    raw = value.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValidationError(f"{what} is longer than 65535 bytes", record_id)
    return _U16.pack(len(raw)) + raw


def _read_binary(path):
    cursor = ByteCursor(Path(path).read_bytes())
    magic, version, count, dim = cursor.unpack(_HEADER, "header")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if dim == 0:
        raise FormatError("dimension must be >= 1", 16)
    layer_tag = cursor.text("layer_tag")

    records = []
    for _ in range(count):
        record_start = cursor.offset
        record_id = cursor.text("record id")
        y, y_hat, tag_code = cursor.unpack(_LABELS, "record labels")
        try:
            tag = Tag.from_code(tag_code)
        except ValueError as exc:
            raise FormatError(str(exc), record_start) from None
        emb = np.frombuffer(cursor.take(4 * dim, f"embedding of {record_id!r}"), dtype="<f4")
        records.append(
            EmbeddingRecord(
                id=record_id,
                y=None if y == ABSENT_LABEL else y,
                y_hat=y_hat,
                emb=emb,
                tag=tag,
            )
        )
    if cursor.offset != len(cursor.buffer):
        raise FormatError(
            f"{len(cursor.buffer) - cursor.offset} trailing bytes after {count} records",
            cursor.offset,
        )
    return EmbeddingDataset(d=dim, records=records, layer_tag=layer_tag)


def _write_binary(ds, path):
    chunks = [_HEADER.pack(MAGIC, VERSION, len(ds), ds.d), _pack_text(ds.layer_tag, "layer_tag")]
    for record in ds:
        if record.y == ABSENT_LABEL:
            raise ValidationError("label -1 is reserved for an absent label", record.id)
        chunks.append(_pack_text(record.id, "record id", record.id))
        try:
            chunks.append(
                _LABELS.pack(
                    ABSENT_LABEL if record.y is None else record.y,
                    record.y_hat,
                    record.tag.code,
                )
            )
        except struct.error:
            raise ValidationError("labels must fit in a signed 32-bit integer", record.id) from None
        with np.errstate(over="ignore"):
            emb = record.emb.astype("<f4")
        if not np.all(np.isfinite(emb)):
            raise ValidationError("emb does not fit in float32", record.id)
        chunks.append(emb.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def _iter_json_lines(path):
    """Yield (line number, byte offset, decoded object) for non-blank lines."""
    offset = 0
    with open(path, "rb") as handle:
        for lineno, raw in enumerate(handle, start=1):
            start = offset
            offset += len(raw)
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise FormatError(f"line {lineno}: invalid JSON ({exc})", start) from None
            if not isinstance(obj, dict):
                raise FormatError(f"line {lineno}: expected a JSON object", start)
            yield lineno, start, obj


def _validated(serializer_class, obj, lineno):
    serializer = serializer_class(data=obj)
    if not serializer.is_valid():
        raise ValidationError(f"line {lineno}: {dict(serializer.errors)}", obj.get("id"))
    try:
        return serializer.save()
    except serializers.ValidationError as exc:
        raise ValidationError(f"line {lineno}: {exc.detail}", obj.get("id")) from None


def _read_jsonl(path):
    d = None
    layer_tag = "L"
    records = []
    for lineno, start, obj in _iter_json_lines(path):
        if not records and d is None and "id" not in obj:
            header = DatasetHeaderSerializer(data=obj)
            if not header.is_valid():
                raise FormatError(f"line {lineno}: bad header {dict(header.errors)}", start)
            d = header.validated_data["d"]
            layer_tag = header.validated_data["layer_tag"]
            continue
        records.append(_validated(EmbeddingRecordSerializer, obj, lineno))
    if not records:
        raise EmptyInputError(f"{path} contains no records")
    return EmbeddingDataset(d=d or records[0].d, records=records, layer_tag=layer_tag)


def _write_jsonl(ds, path):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps({"d": ds.d, "layer_tag": ds.layer_tag}) + "\n")
        for record in ds:
            handle.write(json.dumps(EmbeddingRecordSerializer(record).data) + "\n")


def read_dataset(path, format=None):
    """Load and validate an embedding dataset.

    ``format`` defaults to the one implied by the file extension.
    """
    format = DatasetFormat(format) if format else DatasetFormat.for_path(path)
    ds = _read_binary(path) if format is DatasetFormat.BINARY else _read_jsonl(path)
    if not len(ds):
        raise EmptyInputError(f"{path} contains no records")
    logger.info(f"Read {len(ds)} records (d={ds.d}, layer={ds.layer_tag}) from {path}")
    return ds


def write_dataset(ds, path, format=None):
    """Write ``ds`` so that ``read_dataset`` reproduces it.

    Binary output stores float32, so vectors that did not come from float32
    are rounded on the way out and values beyond the float32 range are
    rejected.
    """
    if not len(ds):
        raise EmptyInputError("refusing to write a dataset with no records")
    format = DatasetFormat(format) if format else DatasetFormat.for_path(path)
    if format is DatasetFormat.BINARY:
        _write_binary(ds, path)
    else:
        _write_jsonl(ds, path)
    logger.info(f"Wrote {len(ds)} records to {path} ({format})")


def read_logprobs(path):
    """Load token log-prob records (JSONL with keys id, logps and optional tag)."""
    records = []
    seen = set()
    for lineno, _, obj in _iter_json_lines(path):
        record = _validated(TokenLogProbSerializer, obj, lineno)
        if record.id in seen:
            raise ValidationError("duplicate record id", record.id)
        seen.add(record.id)
        records.append(record)
    if not records:
        raise EmptyInputError(f"{path} contains no log-prob records")
    logger.info(f"Read {len(records)} log-prob records from {path}")
    return records
