import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from depth.halfspace_mass import score_hm
from depth.models import HmHyperParams
from depthguard.exceptions import (
    FactorizationError,
    FormatError,
    InsufficientSamplesError,
    UnknownClassError,
)
from ingest.models import EmbeddingDataset, EmbeddingRecord, Tag, TokenLogProbRecord
from metrics.evaluation import auroc, fpr_at_tpr
from metrics.models import ScoreTable

from .language_model import LanguageModelScorer, score_lm
from .larousse import DepthScorer, class_seed, fit_larousse, score_larousse
from .mahalanobis import MahalanobisScorer, fit_mahalanobis, score_mahalanobis
from .models import GaussianClassModel
from .storage import MANIFEST_NAME, load_gaussian, load_hm_directory, save_gaussian, save_hm_directory


def labelled(X, y, tag=Tag.TRAIN, y_hat=None, prefix="r"):
    return [
        EmbeddingRecord(
            id=f"{prefix}{i}",
            y=int(label),
            y_hat=int(label if y_hat is None else y_hat[i]),
            emb=x,
            tag=tag,
        )
        for i, (x, label) in enumerate(zip(X, y))
    ]


def two_class_dataset(n=40, d=3, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.standard_normal((n, d)), rng.standard_normal((n, d)) + 4])
    y = np.repeat([0, 1], n)
    return EmbeddingDataset(d=d, records=labelled(X, y))


class MahalanobisTests(SimpleTestCase):
    def test_matches_quadratic_form_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(100):
            d = int(rng.integers(1, 7))
            A = rng.standard_normal((d, d))
            covariance = A @ A.T + 0.1 * np.eye(d)
            precision = np.linalg.inv(covariance)
            precision = (precision + precision.T) / 2
            mean = rng.standard_normal(d)
            model = GaussianClassModel(
                d=d, means={3: mean}, precisions={3: precision}, ridges={3: 0.0}, class_counts={3: 10}
            )
            z = rng.standard_normal(d) * 3
            diff = z - mean
            oracle = 0.0
            for i in range(d):
                for j in range(d):
                    oracle += diff[i] * precision[i, j] * diff[j]
            score = score_mahalanobis(model, z, 3)
            self.assertLessEqual(abs(score - oracle), 1e-10 * max(1.0, abs(oracle)), msg=f"trial {trial}")

    def test_fit_uses_maximum_likelihood_covariance_and_ridge(self):
        ds = two_class_dataset()
        model = fit_mahalanobis(ds, ridge=0.01)
        X0 = ds.by_class()[0]
        covariance = np.cov(X0, rowvar=False, bias=True)
        np.testing.assert_allclose(model.means[0], X0.mean(axis=0), atol=1e-12)
        np.testing.assert_allclose(model.precisions[0], np.linalg.inv(covariance + 0.01 * np.eye(3)), rtol=1e-9)
        self.assertEqual(model.ridges, {0: 0.01, 1: 0.01})
        self.assertEqual(score_mahalanobis(model, model.means[1], 1), 0.0)

    def test_hand_computed_fits(self):
        square = EmbeddingDataset(d=2, records=labelled([[0, 0], [2, 0], [0, 2], [2, 2]], [0] * 4))
        model = fit_mahalanobis(square, ridge=0.0)
        np.testing.assert_allclose(model.means[0], [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(model.precisions[0], np.eye(2), atol=1e-12)

        corners = [[2, 1], [2, -1], [-2, 1], [-2, -1]]
        model = fit_mahalanobis(EmbeddingDataset(d=2, records=labelled(corners, [0] * 4)), ridge=0.0)
        self.assertAlmostEqual(score_mahalanobis(model, [2.0, 0.0], 0), 1.0, places=12)

        same = EmbeddingDataset(d=2, records=labelled(np.ones((3, 2)), [0] * 3))
        model = fit_mahalanobis(same, ridge=1e-3)
        np.testing.assert_allclose(model.precisions[0], 1000 * np.eye(2), rtol=1e-12)

    def test_invertible_linear_map_leaves_scores_unchanged(self):
        rng = np.random.default_rng(31)
        X = rng.standard_normal((200, 4))
        queries = rng.standard_normal((20, 4)) * 2
        base = fit_mahalanobis(EmbeddingDataset(d=4, records=labelled(X, [0] * 200)), ridge=0.0)
        expected = np.array([score_mahalanobis(base, q, 0) for q in queries])
        for trial in range(50):
            A = rng.standard_normal((4, 4)) + 3 * np.eye(4)
            if np.linalg.cond(A) > 100:
                continue
            mapped = fit_mahalanobis(EmbeddingDataset(d=4, records=labelled(X @ A.T, [0] * 200)), ridge=0.0)
            scores = np.array([score_mahalanobis(mapped, A @ q, 0) for q in queries])
            np.testing.assert_allclose(scores, expected, rtol=1e-6, err_msg=f"trial {trial}")

    def test_default_ridge_is_relative_to_trace(self):
        ds = two_class_dataset()
        model = fit_mahalanobis(ds, relative_ridge=1e-3)
        covariance = np.cov(ds.by_class()[1], rowvar=False, bias=True)
        self.assertAlmostEqual(model.ridges[1], 1e-3 * np.trace(covariance) / 3)

    def test_single_sample_class(self):
        records = labelled(np.zeros((3, 2)) + [[0, 0], [1, 0], [5, 5]], [0, 0, 1])
        with self.assertRaises(InsufficientSamplesError):
            fit_mahalanobis(EmbeddingDataset(d=2, records=records))

    def test_rank_deficient_covariance(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        ds = EmbeddingDataset(d=2, records=labelled(X, [0, 0, 0]))
        with self.assertRaisesMessage(FactorizationError, "--ridge"):
            fit_mahalanobis(ds, ridge=0.0)
        model = fit_mahalanobis(ds, ridge=1e-3)
        self.assertGreater(score_mahalanobis(model, [1.0, -1.0], 0), 0.0)

    def test_unknown_class_names_the_record(self):
        scorer = MahalanobisScorer(fit_mahalanobis(two_class_dataset()))
        record = EmbeddingRecord(id="lost", y=None, y_hat=9, emb=[0.0, 0.0, 0.0], tag=Tag.CLEAN)
        with self.assertRaisesMessage(UnknownClassError, "'lost'"):
            scorer.score(record)

    def test_storage_round_trip(self):
        model = fit_mahalanobis(two_class_dataset(), ridge=0.5)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "model.lgm"
            save_gaussian(model, path)
            self.assertEqual(load_gaussian(path), model)
            path.write_bytes(path.read_bytes()[:-4])
            with self.assertRaises(FormatError):
                load_gaussian(path)


class DepthScorerTests(SimpleTestCase):
    def setUp(self):
        self.ds = two_class_dataset()
        self.params = HmHyperParams(K=300, n_s=16, lambda_=0.5, seed=5)
        self.model = fit_larousse(self.ds, self.params)

    def test_one_model_per_class_with_derived_seeds(self):
        self.assertEqual(self.model.classes, [0, 1])
        self.assertEqual(self.model[0].params.seed, class_seed(5, 0))
        self.assertNotEqual(class_seed(5, 0), class_seed(5, 1))
        self.assertEqual(self.model[1].fit_size, 40)

    def test_score_is_negated_depth(self):
        z = np.array([4.0, 4.0, 4.0])
        self.assertEqual(score_larousse(self.model, z, 1), -score_hm(self.model[1], z))
        self.assertLess(score_larousse(self.model, z, 1), score_larousse(self.model, z, 0))

    def test_batch_keeps_order_and_range(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 3)) * 3
        y_hat = rng.integers(0, 2, 30)
        records = labelled(X, y_hat, tag=Tag.CLEAN)
        scores = DepthScorer(self.model).score_many(records)
        expected = [score_larousse(self.model, r.emb, r.y_hat) for r in records]
        self.assertEqual(scores.tolist(), expected)
        self.assertTrue(np.all((scores >= -1) & (scores <= 0)))

    def test_directory_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            save_hm_directory(self.model, tmp)
            manifest = json.loads((Path(tmp) / MANIFEST_NAME).read_text())
            self.assertEqual([c["file"] for c in manifest["classes"]], ["class_0.lhm", "class_1.lhm"])
            self.assertEqual(manifest["params"]["lambda"], 0.5)
            self.assertEqual(load_hm_directory(tmp), self.model)
            (Path(tmp) / MANIFEST_NAME).write_text("{broken")
            with self.assertRaises(FormatError):
                load_hm_directory(tmp)


class OrientationTests(SimpleTestCase):
    def test_scores_rise_along_a_ray(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((500, 4))
        ds = EmbeddingDataset(d=4, records=labelled(X, [0] * 500))
        scorers = (
            MahalanobisScorer(fit_mahalanobis(ds)),
            DepthScorer(fit_larousse(ds, HmHyperParams(K=5000, seed=4))),
        )
        for trial in range(5):
            ray = rng.standard_normal(4)
            ray /= np.linalg.norm(ray)
            queries = labelled(np.arange(5.0)[:, None] * ray, [0] * 5, Tag.CLEAN, prefix=f"q{trial}_")
            for scorer in scorers:
                with self.subTest(scorer=scorer.name, trial=trial):
                    self.assertTrue(np.all(np.diff(scorer.score_many(queries)) >= 0))


class LanguageModelTests(SimpleTestCase):
    def test_negated_sum(self):
        self.assertEqual(score_lm(TokenLogProbRecord("a", [-0.5, -1.5])), 2.0)
        zero = score_lm(TokenLogProbRecord("b", [0.0, -0.0]))
        self.assertEqual(math.copysign(1.0, zero), 1.0)
        scores = LanguageModelScorer().score_many(
            [TokenLogProbRecord("a", [-1.0]), TokenLogProbRecord("b", [-3.0, -1.0])]
        )
        self.assertEqual(scores.tolist(), [1.0, 4.0])


class SyntheticDetectionTests(SimpleTestCase):
    """Shifted-Gaussian attacks are caught by both class-conditioned scorers."""

    def test_shifted_gaussians_are_detected(self):
        rng = np.random.default_rng(2024)
        d, n_train, n_test = 16, 1000, 200
        means = {0: np.zeros(d), 1: np.r_[6.0, np.zeros(d - 1)]}
        X_train = np.vstack([rng.standard_normal((n_train, d)) + means[c] for c in (0, 1)])
        y_train = np.repeat([0, 1], n_train)
        train = EmbeddingDataset(d=d, records=labelled(X_train, y_train))

        y_test = np.repeat([0, 1], n_test)
        clean_X = np.vstack([rng.standard_normal((n_test, d)) + means[c] for c in (0, 1)])
        # Three standard deviations along every coordinate of the predicted class.
        adv_X = np.vstack([rng.standard_normal((n_test, d)) + means[c] + 3.0 for c in (0, 1)])
        test = labelled(clean_X, y_test, Tag.CLEAN, prefix="c") + labelled(
            adv_X, y_test, Tag.ADVERSARIAL, prefix="a"
        )
        is_adv = [r.tag is Tag.ADVERSARIAL for r in test]
        ids = [r.id for r in test]

        oracle = ScoreTable.from_arrays(
            ids, [float(np.sum((r.emb - means[r.y_hat]) ** 2)) for r in test], is_adv
        )
        hm = DepthScorer(fit_larousse(train, HmHyperParams(K=10000, n_s=32, lambda_=0.5, seed=0)))
        maha = MahalanobisScorer(fit_mahalanobis(train))
        oracle_auroc = auroc(oracle)
        self.assertGreaterEqual(oracle_auroc, 0.95)
        for scorer in (hm, maha):
            table = ScoreTable.from_arrays(ids, scorer.score_many(test), is_adv)
            with self.subTest(scorer=scorer.name):
                self.assertGreaterEqual(auroc(table), 0.95)
                self.assertLessEqual(fpr_at_tpr(table, 0.9), 0.25)
        maha_table = ScoreTable.from_arrays(ids, maha.score_many(test), is_adv)
        self.assertAlmostEqual(auroc(maha_table), oracle_auroc, delta=0.02)
