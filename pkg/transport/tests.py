import itertools

import numpy as np
from django.test import SimpleTestCase

from depthguard.exceptions import DimensionMismatchError, SizeMismatchError

from .wasserstein import PointCloud, balance_clouds, layer_discrimination, layer_triad, w1_exact


def brute_force_w1(a, b):
    n = len(a)
    return min(
        sum(np.linalg.norm(a[i] - b[j]) for i, j in enumerate(perm)) / n
        for perm in itertools.permutations(range(n))
    )


class W1Tests(SimpleTestCase):
    def test_examples(self):
        cloud = np.random.default_rng(0).standard_normal((10, 3))
        self.assertEqual(w1_exact(cloud, cloud), 0.0)
        self.assertEqual(w1_exact([[0.0, 0.0]], [[3.0, 4.0]]), 5.0)
        self.assertEqual(w1_exact([0.0, 1.0], [2.0, 3.0]), 2.0)

    def test_matches_permutation_search(self):
        rng = np.random.default_rng(1)
        for n in range(1, 8):
            a, b = rng.standard_normal((n, 2)), rng.standard_normal((n, 2))
            self.assertAlmostEqual(w1_exact(a, b), brute_force_w1(a, b), delta=1e-9)

    def test_metric_axioms(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(1, 51))
            a, b, c = (rng.standard_normal((n, 3)) * rng.uniform(0.5, 2) for _ in range(3))
            self.assertAlmostEqual(w1_exact(a, b), w1_exact(b, a), delta=1e-9)
            self.assertLessEqual(w1_exact(a, c), w1_exact(a, b) + w1_exact(b, c) + 1e-9)

    def test_translation(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((40, 5))
        v = rng.standard_normal(5)
        self.assertAlmostEqual(w1_exact(a, a + v), np.linalg.norm(v), delta=1e-9)

    def test_size_and_dimension_checks(self):
        with self.assertRaises(SizeMismatchError):
            w1_exact(np.zeros((3, 2)), np.zeros((4, 2)))
        with self.assertRaises(DimensionMismatchError):
            w1_exact(np.zeros((3, 2)), np.zeros((3, 3)))


class LayerTests(SimpleTestCase):
    def test_ramp_of_shifted_layers(self):
        base = np.random.default_rng(4).standard_normal((30, 4))
        shift = np.eye(4)[0]
        layers = [(f"layer{k}", base, base + k * shift) for k in range(3)]
        result = layer_discrimination(layers)
        self.assertEqual([tag for tag, _ in result], ["layer0", "layer1", "layer2"])
        np.testing.assert_allclose([w for _, w in result], [0.0, 1.0, 2.0], atol=1e-9)

    def test_balancing_keeps_source_order(self):
        big = PointCloud(np.arange(20.0)[:, None])
        small = PointCloud(np.zeros((5, 1)))
        a, b = balance_clouds(big, small, seed=3)
        self.assertEqual(a.n, 5)
        self.assertEqual(a.points[:, 0].tolist(), sorted(a.points[:, 0].tolist()))
        self.assertIs(b, small)
        again, _ = balance_clouds(big, small, seed=3)
        self.assertEqual(again.points.tolist(), a.points.tolist())

    def test_triad_with_training_cloud(self):
        rng = np.random.default_rng(5)
        train = rng.standard_normal((60, 2))
        clean = rng.standard_normal((20, 2))
        row = layer_triad("L", clean, clean + [10.0, 0.0], train=train)
        self.assertAlmostEqual(row.w1, 10.0, delta=1e-9)
        self.assertLess(row.w1_train_clean, row.w1_train_adv)
        self.assertIsNone(layer_triad("L", clean, clean).w1_train_clean)
