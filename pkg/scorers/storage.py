"""Persistence for fitted class-conditioned scorers.

LGM1 (little-endian)::

    magic "LGM1", version u32, d u32, class count u32, then per class in
    ascending label order: label i32, samples u64, mean d x f64,
    precision d*d x f64 (row-major), ridge f64

A halfspace-mass detector is a directory: ``manifest.json`` plus one LHM1
file per class.
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from depth.storage import load_model, save_model
from depthguard.exceptions import FormatError, ValidationError
from ingest.formats import ByteCursor

from .models import ClassConditionedHm, GaussianClassModel
from .serializers import HmDirectoryManifestSerializer

logger = logging.getLogger(__name__)

GAUSSIAN_MAGIC = b"LGM1"
VERSION = 1
MANIFEST_NAME = "manifest.json"

_GAUSSIAN_HEADER = struct.Struct("<4sIII")
_CLASS_HEADER = struct.Struct("<iQ")
_F64 = struct.Struct("<d")


def save_gaussian(model, path):
    chunks = [_GAUSSIAN_HEADER.pack(GAUSSIAN_MAGIC, VERSION, model.d, len(model.classes))]
    for label in model.classes:
        chunks.append(_CLASS_HEADER.pack(label, model.class_counts[label]))
        chunks.append(model.means[label].astype("<f8").tobytes())
        chunks.append(model.precisions[label].astype("<f8").tobytes())
        chunks.append(_F64.pack(model.ridges[label]))
    Path(path).write_bytes(b"".join(chunks))
    logger.info(f"Saved Mahalanobis model ({len(model.classes)} classes) to {path}")


def load_gaussian(path):
    buffer = Path(path).read_bytes()
    cursor = ByteCursor(buffer)
    magic, version, d, n_classes = cursor.unpack(_GAUSSIAN_HEADER, "header")
    if magic != GAUSSIAN_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GAUSSIAN_MAGIC!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    means, precisions, ridges, counts = {}, {}, {}, {}
    for _ in range(n_classes):
        label, count = cursor.unpack(_CLASS_HEADER, "class header")
        means[label] = np.frombuffer(cursor.take(8 * d, "mean"), dtype="<f8").astype(np.float64)
        precisions[label] = (
            np.frombuffer(cursor.take(8 * d * d, "precision"), dtype="<f8")
            .astype(np.float64)
            .reshape(d, d)
        )
        (ridges[label],) = cursor.unpack(_F64, "ridge")
        counts[label] = count
    if cursor.offset != len(buffer):
        raise FormatError(f"{len(buffer) - cursor.offset} trailing bytes", cursor.offset)
    return GaussianClassModel(
        d=d, means=means, precisions=precisions, ridges=ridges, class_counts=counts
    )


def class_file_name(label):
    return f"class_{label}.lhm"


def save_hm_directory(model, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    first = model[model.classes[0]]
    entries = []
    for label in model.classes:
        class_model = model[label]
        save_model(class_model, directory / class_file_name(label))
        entries.append(
            {
                "label": label,
                "file": class_file_name(label),
                "fit_size": class_model.fit_size,
                "seed": class_model.params.seed,
            }
        )
    manifest = {
        "format": "LHM1-dir",
        "version": VERSION,
        "d": model.d,
        "layer_tag": model.layer_tag,
        "params": {**first.params.as_dict(), "seed": model.seed},
        "classes": entries,
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Saved halfspace-mass detector ({len(entries)} classes) to {directory}")


def load_hm_directory(directory):
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    try:
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path} is not valid JSON ({exc})") from None
    serializer = HmDirectoryManifestSerializer(data=raw)
    if not serializer.is_valid():
        raise ValidationError(f"{manifest_path}: {dict(serializer.errors)}")
    manifest = serializer.validated_data

    models = {}
    for entry in manifest["classes"]:
        class_model = load_model(directory / entry["file"])
        if class_model.d != manifest["d"]:
            raise ValidationError(
                f"{entry['file']} has d={class_model.d}, manifest declares d={manifest['d']}"
            )
        models[entry["label"]] = class_model
    return ClassConditionedHm(
        models=models, layer_tag=manifest["layer_tag"], seed=manifest["params"]["seed"]
    )
