import json
from pathlib import Path

from depthguard.exceptions import FormatError, ValidationError
from metrics.evaluation import summarize_reports
from metrics.serializers import DetectionReportSerializer
from metrics.tables import render_summary

from cli.base import DepthCommand


def load_reports(path):
    """Reports stored by ``eval --out``: one object or an array of them."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON ({exc})") from None
    serializer = DetectionReportSerializer(data=raw if isinstance(raw, list) else [raw], many=True)
    if not serializer.is_valid():
        raise ValidationError(f"{path}: {serializer.errors}")
    return serializer.save()


class Command(DepthCommand):
    help = "Mean and standard deviation of detection metrics over several reports (e.g. seeds)."

    def add_command_arguments(self, parser):
        parser.add_argument("--reports", nargs="+", required=True, help="JSON reports written by eval.")
        parser.add_argument("--out", help="JSON summary file.")

    def run(self, **options):
        reports = [report for path in options["reports"] for report in load_reports(path)]
        summary = summarize_reports(reports)
        self.stdout.write(render_summary(summary))
        outputs = []
        if options["out"]:
            Path(options["out"]).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
            outputs.append(options["out"])
        return {"reports": len(reports)}, options["reports"], outputs
