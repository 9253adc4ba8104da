import json
from pathlib import Path

from django.conf import settings

from metrics.evaluation import full_report
from metrics.serializers import DetectionReportSerializer
from metrics.tables import read_score_provenance, read_score_table, render_table, write_curves

from cli.base import DepthCommand
from cli.manifest import file_sha256


class Command(DepthCommand):
    help = "Compute AUROC, FPR at a target TPR, AUPR-IN/OUT and Err of score tables."

    def add_command_arguments(self, parser):
        parser.add_argument("--scores", nargs="+", required=True, help="One or more score table CSVs.")
        parser.add_argument(
            "--r",
            type=float,
            default=settings.DEPTHGUARD["FPR_TPR_TARGET"],
            help="Target true-positive rate of the FPR column.",
        )
        parser.add_argument("--out", help="JSON report (an array when several --scores are given).")
        parser.add_argument("--curves-dir", help="Directory receiving ROC/PR curve CSVs.")

    def report_metadata(self, path):
        metadata = {"scores": Path(path).name, "sha256": file_sha256(path)}
        provenance = read_score_provenance(path)
        if provenance is not None:
            metadata.update(provenance)
        return metadata

    def run(self, **options):
        rows, reports, outputs = [], [], []
        for path in options["scores"]:
            table = read_score_table(path)
            report = full_report(table, options["r"], self.report_metadata(path))
            rows.append((Path(path).stem, report))
            reports.append(DetectionReportSerializer(report).data)
            if options["curves_dir"]:
                outputs.extend(write_curves(report, options["curves_dir"], Path(path).stem))

        self.stdout.write(render_table(rows))
        if options["out"]:
            payload = reports[0] if len(reports) == 1 else reports
            Path(options["out"]).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
            outputs.append(options["out"])
        return {"r": options["r"]}, options["scores"], outputs
