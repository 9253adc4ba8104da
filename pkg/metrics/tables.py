"""Score tables with their provenance files, curve dumps and printed tables."""

import json
import logging
from pathlib import Path

import pandas as pd

from depthguard.exceptions import FormatError, ValidationError

from .models import ScoreTable
from .serializers import ScoreProvenanceSerializer

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ["id", "score", "is_adversarial"]
_TRUE = {"1", "true"}
_FALSE = {"0", "false"}


def write_score_table(table, path):
    frame = pd.DataFrame(
        {
            "id": [e.id for e in table.entries],
            "score": [e.score for e in table.entries],
            "is_adversarial": [int(e.is_adversarial) for e in table.entries],
        },
        columns=SCORE_COLUMNS,
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(table)} scores to {path}")


def read_score_table(path):
    try:
        frame = pd.read_csv(
            path,
            dtype={"id": str, "is_adversarial": str},
            keep_default_na=False,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        raise FormatError(f"{path} is empty") from None
    except pd.errors.ParserError as exc:
        raise FormatError(f"{path} is not a valid CSV file ({exc})") from None
    missing = [c for c in SCORE_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"{path} lacks column(s) {', '.join(missing)}")

    flags = frame["is_adversarial"].str.strip().str.lower()
    bad = ~flags.isin(_TRUE | _FALSE)
    if bad.any():
        row = frame[bad].iloc[0]
        raise ValidationError(f"is_adversarial must be 0/1, got {row['is_adversarial']!r}", row["id"])
    scores = pd.to_numeric(frame["score"], errors="coerce")
    if scores.isna().any():
        raise ValidationError("score is not a number", frame["id"][scores.isna()].iloc[0])
    return ScoreTable.from_arrays(frame["id"], scores.to_numpy(), flags.isin(_TRUE).to_numpy())


def provenance_path(path):
    return Path(path).with_suffix(".meta.json")


def write_score_provenance(provenance, table_path):
    serializer = ScoreProvenanceSerializer(data=provenance)
    serializer.is_valid(raise_exception=True)
    path = provenance_path(table_path)
    path.write_text(json.dumps(serializer.validated_data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_score_provenance(table_path):
    """Provenance stored next to a score table, or ``None`` when there is none."""
    path = provenance_path(table_path)
    if not path.exists():
        logger.info(f"{table_path} has no provenance file; report metadata will omit scorer and seed")
        return None
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON ({exc.msg})") from None
    serializer = ScoreProvenanceSerializer(data=data)
    if not serializer.is_valid():
        raise FormatError(f"{path}: {dict(serializer.errors)}")
    return dict(serializer.validated_data)


def write_curves(report, directory, stem="report"):
    """Dump the ROC and PR curves of ``report`` as ``<stem>.roc.csv`` / ``<stem>.pr.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    roc = pd.DataFrame(
        [(p.threshold, p.fpr, p.tpr) for p in report.roc_points],
        columns=["threshold", "fpr", "tpr"],
    )
    pr = pd.DataFrame(
        [(p.threshold, p.precision, p.recall) for p in report.pr_points],
        columns=["threshold", "precision", "recall"],
    )
    roc_path = directory / f"{stem}.roc.csv"
    pr_path = directory / f"{stem}.pr.csv"
    roc.to_csv(roc_path, index=False, lineterminator="\n")
    pr.to_csv(pr_path, index=False, lineterminator="\n")
    return roc_path, pr_path


def render_table(rows):
    """Fixed-width table of (name, DetectionReport) pairs, metrics in percent."""
    rows = list(rows)
    headers = list(rows[0][1].row()) if rows else ["AUROC", "FPR", "AUPR-IN", "AUPR-OUT", "Err"]
    name_width = max([len("scores")] + [len(name) for name, _ in rows])
    lines = [f"{'scores':<{name_width}}" + "".join(f"{h:>10}" for h in headers)]
    for name, report in rows:
        cells = "".join(f"{100 * value:>10.1f}" for value in report.row().values())
        lines.append(f"{name:<{name_width}}{cells}")
    return "\n".join(lines)


def render_summary(summary):
    """Fixed-width mean +/- std table of a summarize_reports() result, in percent."""
    lines = [f"{'metric':<10}{'mean':>10}{'std':>10}{'runs':>6}"]
    for name, stats in summary.items():
        lines.append(
            f"{name:<10}{100 * stats['mean']:>10.1f}{100 * stats['std']:>10.1f}{stats['n']:>6}"
        )
    return "\n".join(lines)
