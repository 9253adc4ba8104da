import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from depthguard.exceptions import EmptyInputError, ValidationError
from metrics.models import ScoreTable

from .models import Calibration, Threshold
from .thresholds import calibrate_gamma, decide, write_decisions


def scores(values):
    return ScoreTable.from_arrays([f"s{i}" for i in range(len(values))], values, [False] * len(values))


class DecideTests(SimpleTestCase):
    def test_ties_are_flagged(self):
        decisions = decide(scores([1.0, 2.0, 3.0]), Threshold(2.0))
        self.assertEqual([d.flagged for d in decisions], [False, True, True])
        self.assertEqual([d.id for d in decisions], ["s0", "s1", "s2"])

    def test_extreme_thresholds(self):
        t = scores([1.0, 2.0, 3.0])
        self.assertTrue(all(d.flagged for d in decide(t, -1e300)))
        self.assertFalse(any(d.flagged for d in decide(t, 3.5)))

    def test_raising_gamma_never_flags_more(self):
        values = np.random.default_rng(0).standard_normal(200)
        t = scores(values)
        counts = [sum(d.flagged for d in decide(t, g)) for g in np.linspace(-3, 3, 25)]
        self.assertEqual(counts, sorted(counts, reverse=True))

    def test_gamma_must_be_finite(self):
        with self.assertRaises(ValidationError):
            Threshold(float("inf"))

    def test_decisions_csv(self):
        decisions = decide(scores([0.5, 1.5]), Threshold(1.0))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "decisions.csv"
            write_decisions(decisions, path)
            self.assertEqual(path.read_text().splitlines(), ["id,score,flagged", "s0,0.5,0", "s1,1.5,1"])


class CalibrationTests(SimpleTestCase):
    def test_order_statistic_convention(self):
        self.assertEqual(calibrate_gamma(range(1, 101), 0.9).gamma, 90.0)
        self.assertEqual(calibrate_gamma([3.0, 1.0, 2.0], 0.5).gamma, 2.0)
        self.assertEqual(calibrate_gamma([4.2] * 7, 0.3).gamma, 4.2)

    def test_threshold_records_its_calibration(self):
        threshold = calibrate_gamma([1.0, 2.0], 0.5)
        self.assertIs(threshold.calibration, Calibration.CLEAN_QUANTILE)
        self.assertEqual(threshold.q, 0.5)

    def test_false_alarm_rate_on_calibration_set(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            values = rng.standard_normal(int(rng.integers(1, 80)))
            q = float(rng.uniform(0.05, 0.95))
            gamma = calibrate_gamma(values, q).gamma
            self.assertLessEqual(np.mean(values >= gamma), 1 - q + 1 / values.size + 1e-12)
            self.assertGreaterEqual(np.mean(values <= gamma), q - 1e-12)

    def test_invalid_inputs(self):
        with self.assertRaises(EmptyInputError):
            calibrate_gamma([], 0.5)
        with self.assertRaises(ValidationError):
            calibrate_gamma([1.0], 1.0)
