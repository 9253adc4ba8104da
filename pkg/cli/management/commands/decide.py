from django.conf import settings

from detector.models import Threshold
from detector.thresholds import calibrate_gamma, decide, write_decisions
from metrics.tables import read_score_table

from cli.base import DepthCommand


class Command(DepthCommand):
    help = "Flag every score >= gamma; gamma given or calibrated on clean scores."

    def add_command_arguments(self, parser):
        parser.add_argument("--scores", required=True, help="Score table CSV to threshold.")
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--gamma", type=float)
        group.add_argument(
            "--calibrate-q",
            type=float,
            nargs="?",
            const=settings.DEPTHGUARD["CALIBRATION_QUANTILE"],
            help="Calibrate gamma as this quantile of clean scores.",
        )
        parser.add_argument(
            "--clean-scores",
            help="Score table whose clean entries calibrate gamma (default: --scores).",
        )
        parser.add_argument("--out", required=True, help="Decisions CSV (id,score,flagged).")

    def run(self, **options):
        table = read_score_table(options["scores"])
        inputs = [options["scores"]]
        if options["gamma"] is not None:
            threshold = Threshold(options["gamma"])
        else:
            source = table
            if options["clean_scores"]:
                source = read_score_table(options["clean_scores"])
                inputs.append(options["clean_scores"])
            threshold = calibrate_gamma(source.clean_scores(), options["calibrate_q"])

        decisions = decide(table, threshold)
        write_decisions(decisions, options["out"])
        flagged = sum(d.flagged for d in decisions)
        self.stdout.write(f"{flagged} of {len(decisions)} flagged at {threshold}")
        parameters = {
            "gamma": threshold.gamma,
            "calibration": str(threshold.calibration),
            "q": threshold.q,
        }
        return parameters, inputs, [options["out"]]
