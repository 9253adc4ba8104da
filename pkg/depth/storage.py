"""LHM1 model files.

Layout (little-endian)::

    magic "LHM1", version u32, d u32, K u32, n_s u32, lambda f64, seed u64,
    fit_size u64, then K blocks of (u: d x f64, kappa f64, m_left f64, m_right f64)
"""

import logging
import struct
from pathlib import Path

import numpy as np

from depthguard.exceptions import FormatError
from ingest.formats import ByteCursor

from .models import HalfspaceMassModel, HmHyperParams

logger = logging.getLogger(__name__)

MAGIC = b"LHM1"
VERSION = 1

_HEADER = struct.Struct("<4sIIIIdQQ")


def dump_model(model):
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        model.d,
        model.K,
        model.params.n_s,
        model.params.lambda_,
        model.params.seed,
        model.fit_size,
    )
    body = np.column_stack(
        [model.directions, model.thresholds, model.mass_left, model.mass_right]
    ).astype("<f8")
    return header + body.tobytes()


def load_model_bytes(buffer):
    cursor = ByteCursor(buffer)
    magic, version, d, K, n_s, lambda_, seed, fit_size = cursor.unpack(_HEADER, "header")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    width = d + 3
    body = np.frombuffer(cursor.take(8 * width * K, f"{K} halfspace blocks"), dtype="<f8")
    if cursor.offset != len(buffer):
        raise FormatError(f"{len(buffer) - cursor.offset} trailing bytes", cursor.offset)
    body = body.reshape(K, width).astype(np.float64)
    return HalfspaceMassModel(
        d=d,
        directions=np.ascontiguousarray(body[:, :d]),
        thresholds=np.ascontiguousarray(body[:, d]),
        mass_left=np.ascontiguousarray(body[:, d + 1]),
        mass_right=np.ascontiguousarray(body[:, d + 2]),
        params=HmHyperParams(K=K, n_s=n_s, lambda_=lambda_, seed=seed),
        fit_size=fit_size,
    )


def save_model(model, path):
    Path(path).write_bytes(dump_model(model))
    logger.debug(f"Saved halfspace-mass model (K={model.K}, d={model.d}) to {path}")


def load_model(path):
    return load_model_bytes(Path(path).read_bytes())
