from django.conf import settings

from depth.models import HmHyperParams
from ingest.formats import read_dataset
from ingest.models import Tag
from scorers.larousse import fit_larousse
from scorers.mahalanobis import fit_mahalanobis
from scorers.storage import save_gaussian, save_hm_directory

from cli.base import DepthCommand


class Command(DepthCommand):
    help = "Fit a class-conditioned detector on the train-tagged records of a dataset."

    def add_command_arguments(self, parser):
        parser.add_argument("--scorer", choices=["hm", "mahalanobis"], required=True)
        parser.add_argument("--input", required=True, help="Embedding file with train-tagged records.")
        parser.add_argument("--k", type=int, help="Number of random halfspaces (hm).")
        parser.add_argument("--ns", type=int, help="Sub-sample size per halfspace (hm).")
        parser.add_argument("--lambda", dest="lambda_", type=float, help="Threshold spread (hm).")
        parser.add_argument("--ridge", type=float, help="Absolute covariance ridge (mahalanobis).")
        parser.add_argument("--seed", type=int, help="Base seed (hm).")
        parser.add_argument(
            "--model-out",
            required=True,
            help="Model directory (hm) or LGM1 file (mahalanobis).",
        )

    def run(self, **options):
        ds = read_dataset(options["input"]).filter(Tag.TRAIN).require_nonempty()
        out = options["model_out"]
        if options["scorer"] == "hm":
            params = HmHyperParams.from_settings(
                K=options["k"], n_s=options["ns"], lambda_=options["lambda_"], seed=options["seed"]
            )
            save_hm_directory(fit_larousse(ds, params, n_jobs=options["threads"]), out)
            parameters = {
                "scorer": "hm",
                "k": params.K,
                "ns": params.n_s,
                "lambda": params.lambda_,
                "seed": params.seed,
            }
        else:
            relative = settings.DEPTHGUARD["MAHALANOBIS_RELATIVE_RIDGE"]
            save_gaussian(fit_mahalanobis(ds, ridge=options["ridge"], relative_ridge=relative), out)
            parameters = {"scorer": "mahalanobis", "ridge": options["ridge"], "relative_ridge": relative}
        parameters["layer_tag"] = ds.layer_tag
        parameters["train_records"] = len(ds)
        return parameters, [options["input"]], [out]
