import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from depthguard.exceptions import FormatError, ValidationError

from .evaluation import Positive, aupr, auroc, err, fpr_at_tpr, full_report, summarize_reports
from .models import ScoreTable
from .serializers import DetectionReportSerializer
from .tables import (
    read_score_provenance,
    read_score_table,
    render_table,
    write_curves,
    write_score_provenance,
    write_score_table,
)


def table(clean, adversarial):
    scores = list(clean) + list(adversarial)
    flags = [False] * len(clean) + [True] * len(adversarial)
    return ScoreTable.from_arrays([f"e{i}" for i in range(len(scores))], scores, flags)


def sweep_oracle(scores, labels):
    """Exhaustive threshold sweep: (threshold, tp, fp) for each distinct score, descending."""
    points = []
    for t in sorted(set(scores), reverse=True):
        flagged = scores >= t
        points.append((t, int(np.sum(flagged & labels)), int(np.sum(flagged & ~labels))))
    return points


def auroc_oracle(scores, labels):
    adv, clean = scores[labels], scores[~labels]
    wins = sum(float(a > c) + 0.5 * float(a == c) for a in adv for c in clean)
    return wins / (adv.size * clean.size)


def aupr_oracle(scores, labels):
    n_pos = labels.sum()
    area, recall = 0.0, 0.0
    for _, tp, fp in sweep_oracle(scores, labels):
        area += (tp / n_pos - recall) * tp / (tp + fp)
        recall = tp / n_pos
    return area


def fpr_oracle(scores, labels, r):
    n_pos, n_neg = labels.sum(), (~labels).sum()
    for _, tp, fp in sweep_oracle(scores, labels):
        if tp / n_pos >= r:
            return fp / n_neg


def err_oracle(scores, labels):
    n_pos = labels.sum()
    errors = [n_pos] + [fp + n_pos - tp for _, tp, fp in sweep_oracle(scores, labels)]
    return min(errors) / scores.size


def random_tables(count=200, seed=0):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(2, 101))
        labels = rng.random(n) < rng.uniform(0.2, 0.8)
        labels[0], labels[1] = True, False
        if i % 3 == 0:
            scores = rng.integers(0, 4, n).astype(float)  # heavy ties
        else:
            scores = rng.standard_normal(n) + labels * rng.uniform(0, 2)
        yield ScoreTable.from_arrays([f"e{j}" for j in range(n)], scores, labels)


class MetricExampleTests(SimpleTestCase):
    def test_auroc_examples(self):
        self.assertEqual(auroc(table([0.1, 0.2], [0.8, 0.9])), 1.0)
        self.assertEqual(auroc(table([1, 2, 3], [1, 2, 3])), 0.5)
        self.assertEqual(auroc(table([0.1, 0.3], [0.2, 0.4])), 0.75)

    def test_aupr_examples(self):
        self.assertAlmostEqual(aupr(table([1, 3], [2, 4])), 5 / 6, places=12)
        self.assertEqual(aupr(table([0.1, 0.2], [0.8, 0.9]), Positive.ADVERSARIAL_IN), 1.0)
        self.assertEqual(aupr(table([0.1, 0.2], [0.8, 0.9]), Positive.CLEAN_OUT), 1.0)

    def test_fpr_at_tpr_examples(self):
        t = table([1] * 9 + [10.5], range(2, 12))
        self.assertAlmostEqual(fpr_at_tpr(t, 0.9), 0.1)
        self.assertEqual(fpr_at_tpr(table([0.1, 0.2], [0.8, 0.9]), 0.5), 0.0)
        self.assertEqual(fpr_at_tpr(table([0.1, 0.2], [0.8, 0.9]), 1.0), 0.0)

    def test_identical_distributions(self):
        values = [1.0, 2.0, 2.0, 3.0, 4.0]
        t = table(values, values)
        report = full_report(t, 0.9)
        self.assertEqual(report.auroc, 0.5)
        self.assertGreaterEqual(report.fpr_at_r, 0.9 - 1 / len(t))
        self.assertEqual(report.err, 0.5)
        self.assertAlmostEqual(report.aupr_in, aupr_oracle(t.scores, t.labels), places=12)

    def test_err_examples(self):
        self.assertEqual(err(table([0.1, 0.2], [0.8, 0.9])), 0.0)
        self.assertEqual(err(table([1, 3], [2, 4])), 0.25)

    def test_perfect_report(self):
        report = full_report(table([0.1, 0.2, 0.3], [0.8, 0.9]), 0.9)
        self.assertEqual(tuple(report.row().values()), (1.0, 0.0, 1.0, 1.0, 0.0))

    def test_single_class_table_is_rejected(self):
        with self.assertRaisesMessage(ValidationError, "both clean and adversarial"):
            auroc(table([], [0.3, 0.5]))
        with self.assertRaises(ValidationError):
            fpr_at_tpr(table([0.1], [0.2]), 0.0)


class MetricOracleTests(SimpleTestCase):
    def test_random_tables_match_sweep_oracles(self):
        for i, t in enumerate(random_tables()):
            s, y = t.scores, t.labels
            with self.subTest(table=i):
                self.assertAlmostEqual(auroc(t), auroc_oracle(s, y), delta=1e-12)
                self.assertAlmostEqual(aupr(t, Positive.ADVERSARIAL_IN), aupr_oracle(s, y), delta=1e-12)
                self.assertAlmostEqual(aupr(t, Positive.CLEAN_OUT), aupr_oracle(-s, ~y), delta=1e-12)
                self.assertEqual(fpr_at_tpr(t, 0.9), fpr_oracle(s, y, 0.9))
                self.assertEqual(err(t), err_oracle(s, y))

    def test_report_matches_individual_operations(self):
        for t in random_tables(count=20, seed=1):
            report = full_report(t, 0.8)
            self.assertEqual(report.auroc, auroc(t))
            self.assertEqual(report.aupr_out, aupr(t, Positive.CLEAN_OUT))
            self.assertEqual(report.fpr_at_r, fpr_at_tpr(t, 0.8))
            self.assertEqual(report.err, err(t))
            self.assertEqual(report.roc_points[-1].tpr, 1.0)

    def test_rank_and_permutation_invariance(self):
        rng = np.random.default_rng(7)
        for t in random_tables(count=30, seed=2):
            ids = [e.id for e in t.entries]
            ranks = np.unique(t.scores, return_inverse=True)[1].astype(float)
            ranked = ScoreTable.from_arrays(ids, ranks**3 + 5, t.labels)
            order = rng.permutation(len(t))
            shuffled = ScoreTable(tuple(t.entries[i] for i in order))
            base = full_report(t).row()
            self.assertEqual(full_report(ranked).row(), base)
            self.assertEqual(full_report(shuffled).row(), base)

    def test_complementarity(self):
        for t in random_tables(count=30, seed=3):
            flipped = ScoreTable.from_arrays([e.id for e in t.entries], -t.scores, ~t.labels)
            self.assertAlmostEqual(auroc(flipped), auroc(t), delta=1e-12)


class ReportIoTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_score_table_csv(self):
        t = ScoreTable.from_arrays(["a", "NA", "c"], [0.1, -2.5e-17, 1 / 3], [True, False, False])
        path = self.dir / "scores.csv"
        write_score_table(t, path)
        self.assertEqual(path.read_text().splitlines()[0], "id,score,is_adversarial")
        self.assertEqual(read_score_table(path), t)

    def test_score_table_rejects_bad_flags(self):
        path = self.dir / "scores.csv"
        path.write_text("id,score,is_adversarial\na,0.5,maybe\n")
        with self.assertRaisesMessage(ValidationError, "'a'"):
            read_score_table(path)

    def test_report_json_round_trip(self):
        report = full_report(table([1, 3], [2, 4]), 0.9, {"scores": "x.csv"})
        serializer = DetectionReportSerializer(data=DetectionReportSerializer(report).data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save(), report)

    def test_curves_and_table(self):
        report = full_report(table([0.1, 0.3], [0.2, 0.4]), 0.9)
        roc_path, pr_path = write_curves(report, self.dir, "run")
        self.assertEqual(roc_path.read_text().splitlines()[0], "threshold,fpr,tpr")
        self.assertEqual(len(pr_path.read_text().splitlines()), 5)
        rendered = render_table([("hm", report)])
        self.assertIn("AUPR-OUT", rendered.splitlines()[0])
        self.assertIn("75.0", rendered.splitlines()[1])

    def test_summary_over_seeds(self):
        reports = [full_report(table([0, 1], [2, 3])), full_report(table([0, 2], [1, 3]))]
        summary = summarize_reports(reports)
        self.assertAlmostEqual(summary["auroc"]["mean"], 0.875)
        self.assertAlmostEqual(summary["auroc"]["std"], np.std([1.0, 0.75], ddof=1))
        self.assertEqual(summary["err"]["n"], 2)

    def test_score_provenance(self):
        scores = self.dir / "hm.csv"
        self.assertIsNone(read_score_provenance(scores))
        provenance = {
            "scorer": "hm",
            "seed": 2**63,
            "layer_tag": "L+1",
            "datasets": {"eval.lemb": "ab" * 32},
            "model": "cd" * 32,
        }
        path = write_score_provenance(provenance, scores)
        self.assertEqual(path.name, "hm.meta.json")
        self.assertEqual(read_score_provenance(scores), provenance)
        path.write_text('{"scorer": "knn"}')
        with self.assertRaises(FormatError):
            read_score_provenance(scores)
