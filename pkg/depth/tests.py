import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings
from scipy.stats import spearmanr

from depthguard.exceptions import DimensionMismatchError, EmptyInputError, FormatError, ValidationError

from .halfspace_mass import fit_hm, project, score_hm, score_hm_batch
from .models import HmHyperParams
from .storage import dump_model, load_model, load_model_bytes, save_model


class HyperParamTests(SimpleTestCase):
    def test_defaults(self):
        params = HmHyperParams()
        self.assertEqual((params.K, params.n_s, params.lambda_), (10000, 32, 0.5))

    def test_invalid_values(self):
        for kwargs in ({"K": 0}, {"n_s": 0}, {"lambda_": 0.0}, {"lambda_": 2.5}, {"seed": -1}):
            with self.subTest(**kwargs), self.assertRaises(ValidationError):
                HmHyperParams(**kwargs)

    def test_from_settings_ignores_missing_overrides(self):
        params = HmHyperParams.from_settings(K=50, n_s=None)
        self.assertEqual((params.K, params.n_s), (50, 32))


class FitTests(SimpleTestCase):
    def test_one_dimensional_closed_form(self):
        model = fit_hm([[-1.0], [0.0], [1.0]], HmHyperParams(K=100_000, n_s=3, lambda_=0.5, seed=0))
        # Every halfspace through the centre point holds two of the three points.
        self.assertAlmostEqual(score_hm(model, [0.0]), 2 / 3, delta=0.01)
        self.assertAlmostEqual(score_hm(model, [2.0]), 1 / 2, delta=0.01)
        self.assertAlmostEqual(score_hm(model, [-2.0]), 1 / 2, delta=0.01)

    def test_singleton_model_scores_one_at_its_point(self):
        rng = np.random.default_rng(5)
        for d in (1, 2, 7, 64):
            x = rng.standard_normal(d) * 10
            for K in (1, 3, 50):
                with self.subTest(d=d, K=K):
                    model = fit_hm([x], HmHyperParams(K=K, seed=d))
                    self.assertEqual(score_hm(model, x), 1.0)

    def test_masses_are_subsample_fractions(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((50, 4))
        model = fit_hm(X, HmHyperParams(K=40, n_s=8, seed=2), keep_subsamples=True)
        for halfspace, index in zip(model.halfspaces, model.subsample_indices):
            self.assertEqual(len(set(index.tolist())), 8)
            p = project(X[index], halfspace.u[None, :])[:, 0]
            left = np.count_nonzero(p < halfspace.kappa)
            self.assertEqual(halfspace.m_left, left / 8)
            self.assertEqual(halfspace.m_right, (8 - left) / 8)
        np.testing.assert_allclose(np.linalg.norm(model.directions, axis=1), 1.0, atol=1e-12)

    def test_thresholds_stay_inside_the_lambda_window(self):
        X = np.array([[0.0], [1.0], [4.0]])
        model = fit_hm(X, HmHyperParams(K=500, n_s=3, lambda_=0.5, seed=4))
        projected = model.directions[:, 0] * np.array([[0.0], [1.0], [4.0]])
        lo, hi = projected.min(axis=0), projected.max(axis=0)
        mid, half = (lo + hi) / 2, 0.25 * (hi - lo)
        self.assertTrue(np.all(model.thresholds >= mid - half - 1e-12))
        self.assertTrue(np.all(model.thresholds <= mid + half + 1e-12))

    def test_fit_is_deterministic_and_thread_independent(self):
        X = np.random.default_rng(3).standard_normal((40, 5))
        params = HmHyperParams(K=64, n_s=10, seed=11)
        sequential = fit_hm(X, params)
        self.assertEqual(sequential, fit_hm(X, params))
        self.assertEqual(sequential, fit_hm(X, params, n_jobs=4))
        self.assertNotEqual(sequential, fit_hm(X, params.with_seed(12)))

    def test_lambda_above_one_warns(self):
        with self.assertLogs("depth", level="WARNING"):
            fit_hm([[0.0], [1.0]], HmHyperParams(K=5, lambda_=1.5))

    def test_empty_and_non_finite_inputs(self):
        with self.assertRaises(EmptyInputError):
            fit_hm(np.empty((0, 3)), HmHyperParams(K=5))
        with self.assertRaises(ValidationError):
            fit_hm([[0.0, np.inf]], HmHyperParams(K=5))


class ScoreTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(8)
        self.X = rng.standard_normal((60, 3))
        self.model = fit_hm(self.X, HmHyperParams(K=200, n_s=16, seed=1))

    def test_depth_lies_in_unit_interval(self):
        queries = np.random.default_rng(9).standard_normal((100, 3)) * 5
        scores = score_hm_batch(self.model, queries)
        self.assertTrue(np.all((scores >= 0) & (scores <= 1)))

    def test_batch_matches_single_queries_exactly(self):
        queries = np.random.default_rng(10).standard_normal((25, 3))
        batch = score_hm_batch(self.model, queries)
        self.assertEqual(batch.tolist(), [score_hm(self.model, q) for q in queries])

    @override_settings(DEPTHGUARD={"PROJECTION_BLOCK": 7})
    def test_block_size_does_not_change_scores(self):
        queries = np.random.default_rng(11).standard_normal((9, 3))
        small = score_hm_batch(self.model, queries)
        with self.settings(DEPTHGUARD={"PROJECTION_BLOCK": 4_000_000}):
            large = score_hm_batch(self.model, queries)
        self.assertEqual(small.tolist(), large.tolist())

    def test_center_is_deeper_than_far_points(self):
        far = score_hm(self.model, self.X.mean(axis=0) + 20)
        self.assertLess(far, score_hm(self.model, self.X.mean(axis=0)))

    def test_depth_decreases_along_a_ray(self):
        rng = np.random.default_rng(21)
        X = rng.standard_normal((2000, 8))
        model = fit_hm(X, HmHyperParams(K=10_000, seed=3))
        ray = rng.standard_normal(8)
        ray /= np.linalg.norm(ray)
        steps = np.arange(0, 4.5, 0.5)
        scores = score_hm_batch(model, steps[:, None] * ray)
        self.assertTrue(np.all(np.diff(scores) < 0), scores)
        self.assertEqual(spearmanr(steps, scores).statistic, -1.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            score_hm(self.model, [0.0, 0.0])

    def test_projection_shape(self):
        self.assertEqual(project(self.X[:4], self.model.directions).shape, (4, 200))


class StorageTests(SimpleTestCase):
    def test_model_file_reproduces_scores(self):
        X = np.random.default_rng(2).standard_normal((30, 4))
        model = fit_hm(X, HmHyperParams(K=50, n_s=8, lambda_=0.7, seed=99))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "model.lhm"
            save_model(model, path)
            loaded = load_model(path)
        self.assertEqual(loaded, model)
        self.assertEqual(score_hm_batch(loaded, X).tolist(), score_hm_batch(model, X).tolist())

    def test_corrupt_files(self):
        model = fit_hm([[0.0, 1.0]], HmHyperParams(K=3))
        raw = dump_model(model)
        with self.assertRaisesMessage(FormatError, "magic"):
            load_model_bytes(b"XXXX" + raw[4:])
        with self.assertRaisesMessage(FormatError, "truncated"):
            load_model_bytes(raw[:-1])
        with self.assertRaisesMessage(FormatError, "trailing"):
            load_model_bytes(raw + b"\0")
