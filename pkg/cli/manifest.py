"""Run manifests: effective parameters and input hashes of every command run.

Manifests are the only artifacts that carry a timestamp; data files written
by the commands depend on their inputs and parameters alone.
"""

import hashlib
import json
import logging
from pathlib import Path

import django
import numpy as np
import scipy
import sklearn
from django.utils import timezone
from rest_framework import serializers

logger = logging.getLogger(__name__)

CHUNK = 1 << 20


def file_sha256(path):
    """SHA-256 of a file, or of every file of a directory in name order."""
    path = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    for file in files:
        if path.is_dir():
            digest.update(file.relative_to(path).as_posix().encode("utf-8") + b"\0")
        with open(file, "rb") as handle:
            while chunk := handle.read(CHUNK):
                digest.update(chunk)
    return digest.hexdigest()


class RunManifestSerializer(serializers.Serializer):
    command = serializers.CharField()
    created_at = serializers.DateTimeField()
    parameters = serializers.DictField()
    inputs = serializers.DictField(child=serializers.CharField())
    outputs = serializers.ListField(child=serializers.CharField())
    threads = serializers.IntegerField(min_value=1)
    versions = serializers.DictField(child=serializers.CharField())


def library_versions():
    return {
        "django": django.get_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
    }


def build_manifest(command, parameters, inputs, outputs, threads):
    return RunManifestSerializer(
        {
            "command": command,
            "created_at": timezone.now(),
            "parameters": parameters,
            "inputs": {str(path): file_sha256(path) for path in inputs},
            "outputs": [str(path) for path in outputs],
            "threads": threads,
            "versions": library_versions(),
        }
    ).data


def write_manifest(manifest, output_dir):
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / f"{manifest['command']}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote run manifest {path}")
    return path
