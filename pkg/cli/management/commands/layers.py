import json
from pathlib import Path

import pandas as pd

from depthguard.exceptions import FormatError, ValidationError
from ingest.formats import read_dataset
from transport.serializers import LayersManifestSerializer
from transport.wasserstein import PointCloud, layer_triad

from cli.base import DepthCommand


def _cloud(path):
    return PointCloud.from_dataset(read_dataset(path))


class Command(DepthCommand):
    help = "Exact W1 distance between clean and adversarial embeddings of each layer."

    def add_command_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="JSON listing per-layer embedding files.")
        parser.add_argument("--out", required=True, help="CSV with layer_tag,w1 (+ train distances).")
        parser.add_argument("--seed", type=int, default=0, help="Seed of train-cloud sub-sampling.")

    def run(self, **options):
        manifest_path = Path(options["manifest"])
        try:
            raw = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{manifest_path} is not valid JSON ({exc})") from None
        serializer = LayersManifestSerializer(data=raw)
        if not serializer.is_valid():
            raise ValidationError(f"{manifest_path}: {dict(serializer.errors)}")
        layers = serializer.validated_data["layers"]

        base = manifest_path.parent
        inputs = [manifest_path]
        rows = []
        for layer in layers:
            paths = {key: base / layer[key] for key in ("clean", "adversarial", "train") if key in layer}
            inputs.extend(paths.values())
            train = _cloud(paths["train"]) if "train" in paths else None
            rows.append(
                layer_triad(
                    layer["tag"],
                    _cloud(paths["clean"]),
                    _cloud(paths["adversarial"]),
                    train=train,
                    seed=options["seed"],
                )
            )

        frame = pd.DataFrame({"layer_tag": [r.layer_tag for r in rows], "w1": [r.w1 for r in rows]})
        if any("train" in layer for layer in layers):
            frame["w1_train_clean"] = [r.w1_train_clean for r in rows]
            frame["w1_train_adv"] = [r.w1_train_adv for r in rows]
        frame.to_csv(options["out"], index=False, lineterminator="\n")
        return {"layers": len(rows), "seed": options["seed"]}, inputs, [options["out"]]
