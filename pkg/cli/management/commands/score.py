import logging
from pathlib import Path

from depthguard.exceptions import ValidationError
from ingest.formats import read_dataset, read_logprobs
from ingest.models import Tag
from metrics.models import ScoreTable
from metrics.tables import write_score_provenance, write_score_table
from scorers.language_model import LanguageModelScorer
from scorers.larousse import DepthScorer
from scorers.mahalanobis import MahalanobisScorer
from scorers.storage import load_gaussian, load_hm_directory

from cli.base import DepthCommand
from cli.manifest import file_sha256

logger = logging.getLogger(__name__)

SCORED_TAGS = (Tag.CLEAN, Tag.ADVERSARIAL)


def _hashes(paths):
    return {Path(path).name: file_sha256(path) for path in paths}


class Command(DepthCommand):
    help = "Score clean and adversarial records (higher = more anomalous) into a score table CSV."

    def add_command_arguments(self, parser):
        parser.add_argument("--scorer", choices=["hm", "mahalanobis", "lm"], required=True)
        parser.add_argument("--model", help="Fitted model (hm directory or LGM1 file).")
        parser.add_argument("--input", help="Embedding file with clean/adversarial records.")
        parser.add_argument("--logprobs", help="Token log-prob JSONL file (lm).")
        parser.add_argument(
            "--out",
            required=True,
            help="Score table CSV (id,score,is_adversarial); provenance goes to <stem>.meta.json.",
        )

    def run(self, **options):
        if options["scorer"] == "lm":
            table, inputs, provenance = self.score_logprobs(options)
        else:
            table, inputs, provenance = self.score_embeddings(options)
        write_score_table(table, options["out"])
        meta = write_score_provenance({"scorer": options["scorer"], **provenance}, options["out"])
        parameters = {"scorer": options["scorer"], "records": len(table), "seed": provenance["seed"]}
        return parameters, inputs, [options["out"], meta]

    def score_embeddings(self, options):
        if not options["model"] or not options["input"]:
            self.usage_error(f"--scorer {options['scorer']} needs --model and --input")
        ds = read_dataset(options["input"]).filter(*SCORED_TAGS).require_nonempty()
        seed = None
        if options["scorer"] == "hm":
            model = load_hm_directory(options["model"])
            if model.layer_tag != ds.layer_tag:
                logger.warning(
                    f"model was fitted on layer {model.layer_tag!r}, "
                    f"input embeddings come from layer {ds.layer_tag!r}"
                )
            scorer, seed = DepthScorer(model), model.seed
        else:
            scorer = MahalanobisScorer(load_gaussian(options["model"]))
        scores = scorer.score_many(ds.records)
        flags = [r.tag is Tag.ADVERSARIAL for r in ds]
        provenance = {
            "seed": seed,
            "layer_tag": ds.layer_tag,
            "datasets": _hashes([options["input"]]),
            "model": file_sha256(options["model"]),
        }
        table = ScoreTable.from_arrays(ds.ids, scores, flags)
        return table, [options["model"], options["input"]], provenance

    def score_logprobs(self, options):
        if not options["logprobs"]:
            self.usage_error("--scorer lm needs --logprobs")
        records = read_logprobs(options["logprobs"])
        inputs = [options["logprobs"]]
        if options["input"]:
            tags = {r.id: r.tag for r in read_dataset(options["input"])}
            inputs.append(options["input"])
        else:
            tags = {r.id: r.tag for r in records}
        for record in records:
            if tags.get(record.id) is None:
                raise ValidationError("no clean/adversarial tag for this record", record.id)
        records = [r for r in records if tags[r.id] in SCORED_TAGS]
        if not records:
            raise ValidationError("no clean or adversarial log-prob records to score")
        scores = LanguageModelScorer().score_many(records)
        flags = [tags[r.id] is Tag.ADVERSARIAL for r in records]
        provenance = {"seed": None, "layer_tag": None, "datasets": _hashes(inputs), "model": None}
        return ScoreTable.from_arrays([r.id for r in records], scores, flags), inputs, provenance
