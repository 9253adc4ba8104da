import tempfile
import time
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
from django.conf import settings
from django.test import SimpleTestCase

from depth.halfspace_mass import fit_hm, score_hm
from depth.models import HmHyperParams
from depthguard.exceptions import ValidationError

from .runner import (
    DESK_GRID,
    FULL_GRID,
    TIMING_COLUMNS,
    BenchGrid,
    TimingRecord,
    run_bench,
    scaling_frame,
    summarize_timings,
    write_summary,
    write_timings,
)
from .synthetic import gen_wishart_gaussian, wishart_covariance

TINY_GRID = BenchGrid(dims=(5,), sizes=(30,), repeats=2, k_values=(10,))


def timing_tests_enabled():
    return settings.DEPTHGUARD.get("TIMING_TESTS", True)


class SyntheticDataTests(SimpleTestCase):
    def test_same_seed_same_samples(self):
        self.assertEqual(gen_wishart_gaussian(3, 20, 7).tolist(), gen_wishart_gaussian(3, 20, 7).tolist())
        self.assertNotEqual(gen_wishart_gaussian(3, 20, 7).tolist(), gen_wishart_gaussian(3, 20, 8).tolist())

    def test_one_dimensional_mean(self):
        n = 20_000
        X = gen_wishart_gaussian(1, n, 3)
        sigma = wishart_covariance(1, 3)
        self.assertEqual(sigma.shape, (1, 1))
        self.assertGreater(sigma[0, 0], 0)
        self.assertLess(abs(X.mean()), 3 * np.sqrt(sigma[0, 0] / n))

    def test_sample_covariance_converges(self):
        X = gen_wishart_gaussian(4, 100_000, 11)
        sigma = wishart_covariance(4, 11)
        error = np.linalg.norm(np.cov(X, rowvar=False) - sigma) / np.linalg.norm(sigma)
        self.assertLess(error, 0.05)

    def test_invalid_sizes(self):
        with self.assertRaises(ValidationError):
            gen_wishart_gaussian(0, 10, 0)


class RunnerTests(SimpleTestCase):
    def test_grids(self):
        self.assertEqual(DESK_GRID.dims, (64, 128, 256, 512))
        self.assertEqual(FULL_GRID.k_values, (100, 1000, 10000))
        self.assertEqual(FULL_GRID.repeats, 10)
        with self.assertRaises(ValidationError):
            BenchGrid(dims=(5,), sizes=(10,), repeats=1, k_values=(10,))

    def test_record_accounting(self):
        records = run_bench(TINY_GRID)
        self.assertEqual(len(records), 12)
        counts = pd.Series([(r.method, r.phase) for r in records]).value_counts()
        self.assertTrue((counts == 2).all())
        self.assertTrue(all(r.elapsed > 0 for r in records))
        self.assertEqual({r.K for r in records}, {10, None})

    def test_csv_outputs(self):
        records = run_bench(TINY_GRID)
        with tempfile.TemporaryDirectory() as tmp:
            write_timings(records, Path(tmp) / "timings.csv")
            write_summary(summarize_timings(records), Path(tmp) / "summary.csv")
            timings = pd.read_csv(Path(tmp) / "timings.csv")
            summary = pd.read_csv(Path(tmp) / "summary.csv")
        self.assertEqual(list(timings.columns), TIMING_COLUMNS)
        self.assertEqual(len(summary), 6)
        self.assertTrue({"mean", "q10", "q90"} <= set(summary.columns))
        self.assertTrue((summary["q10"] <= summary["q90"]).all())

    def test_scaling_ratios_use_the_fastest_repeat(self):
        records = [
            TimingRecord("hm", 10, "score", 4, 100, 1.0, 0),
            TimingRecord("hm", 10, "score", 4, 100, 3.0, 1),
            TimingRecord("hm", 10, "score", 4, 900, 1.2, 0),
            TimingRecord("hm", 10, "fit", 4, 100, 2.0, 0),
            TimingRecord("hm", 100, "fit", 4, 100, 30.0, 0),
            TimingRecord("mahalanobis", None, "score", 4, 100, 9.0, 0),
        ]
        scaling = scaling_frame(records).set_index("check")
        self.assertEqual(list(scaling.index), ["score_spread", "fit_linearity"])
        self.assertAlmostEqual(scaling.loc["score_spread", "ratio"], 1.2)
        self.assertAlmostEqual(scaling.loc["fit_linearity", "ratio"], 1.5)
        self.assertEqual(scaling.loc["fit_linearity", "K"], 100)

    def test_out_of_memory_cells_are_skipped(self):
        with mock.patch("bench.runner.gen_wishart_gaussian", side_effect=MemoryError):
            with self.assertLogs("bench", level="WARNING") as logs:
                records = run_bench(TINY_GRID)
        self.assertEqual(records, [])
        self.assertIn("out of memory", logs.output[0])


def best_time(func, repeats):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        timings.append(time.perf_counter() - start)
    return min(timings)


class ComplexityTests(SimpleTestCase):
    def setUp(self):
        if not timing_tests_enabled():
            self.skipTest("DEPTHGUARD_TIMING_TESTS is off")

    def test_scoring_time_does_not_depend_on_fit_size(self):
        params = HmHyperParams(K=2000, n_s=32, seed=0)
        query = np.zeros(32)
        times = []
        for n in (100, 10_000):
            model = fit_hm(gen_wishart_gaussian(32, n, n), params)
            score_hm(model, query)
            times.append(best_time(lambda: score_hm(model, query), 30))
        self.assertLess(max(times) / min(times), 1.5)

    def test_fit_time_is_linear_in_k(self):
        X = gen_wishart_gaussian(32, 1000, 0)
        fit_hm(X, HmHyperParams(K=10, seed=0))
        small = best_time(lambda: fit_hm(X, HmHyperParams(K=100, seed=0)), 5)
        large = best_time(lambda: fit_hm(X, HmHyperParams(K=1000, seed=0)), 3)
        self.assertGreater(large / small, 10 / 1.5)
        self.assertLess(large / small, 10 * 1.5)

    def test_desk_grid_rows_meet_the_scaling_bounds(self):
        records = run_bench(DESK_GRID.replace(repeats=5))
        self.assertEqual(len(records), 4 * 3 * 3 * 3 * 5)
        scaling = scaling_frame(records)
        self.assertEqual(len(scaling), 2 * 4 + 4 * 3)
        for row in scaling.itertuples(index=False):
            with self.subTest(check=row.check, K=row.K, d=row.d, n=row.n):
                self.assertLess(row.ratio, 1.5)
                if row.check == "fit_linearity":
                    self.assertGreater(row.ratio, 1 / 1.5)
