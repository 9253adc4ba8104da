import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from depthguard.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    FormatError,
    SplitSizeError,
    ValidationError,
)

from .formats import read_dataset, read_logprobs, write_dataset
from .models import EmbeddingDataset, EmbeddingRecord, SplitSpec, Tag, TokenLogProbRecord
from .splits import scenario1_split


def make_dataset(n=10, d=3, layer_tag="L", seed=0):
    rng = np.random.default_rng(seed)
    # float32-representable values survive the binary format unchanged
    emb = rng.standard_normal((n, d)).astype(np.float32)
    records = [
        EmbeddingRecord(id=f"r{i}", y=i % 2, y_hat=(i // 2) % 2, emb=emb[i], tag=Tag.TRAIN)
        for i in range(n)
    ]
    return EmbeddingDataset(d=d, records=records, layer_tag=layer_tag)


class RecordTests(SimpleTestCase):
    def test_tag_codes(self):
        self.assertEqual([t.code for t in Tag], [0, 1, 2])
        self.assertIs(Tag.from_code(2), Tag.ADVERSARIAL)
        with self.assertRaises(ValueError):
            Tag.from_code(7)

    def test_non_finite_embedding_is_rejected(self):
        with self.assertRaisesMessage(ValidationError, "'bad'"):
            EmbeddingRecord(id="bad", y=0, y_hat=0, emb=[0.0, float("nan")])

    def test_embedding_is_read_only(self):
        record = EmbeddingRecord(id="a", y=0, y_hat=0, emb=[1.0, 2.0])
        with self.assertRaises(ValueError):
            record.emb[0] = 5.0

    def test_dataset_rejects_dimension_mismatch_and_duplicates(self):
        a = EmbeddingRecord(id="a", y=0, y_hat=0, emb=[1.0, 2.0])
        b = EmbeddingRecord(id="b", y=0, y_hat=0, emb=[1.0, 2.0, 3.0])
        with self.assertRaises(DimensionMismatchError):
            EmbeddingDataset(d=2, records=[a, b])
        with self.assertRaisesMessage(ValidationError, "duplicate"):
            EmbeddingDataset(d=2, records=[a, a])

    def test_by_class_groups_rows(self):
        groups = make_dataset(n=6).by_class()
        self.assertEqual(list(groups), [0, 1])
        self.assertEqual(groups[0].shape, (3, 3))

    def test_logprobs_must_be_non_positive(self):
        with self.assertRaises(ValidationError):
            TokenLogProbRecord(id="x", logps=[-1.0, 0.5])


class FormatTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_binary_and_jsonl_preserve_records(self):
        ds = make_dataset(layer_tag="L+1")
        records = list(ds.records)
        records[0] = EmbeddingRecord("r0", None, 1, records[0].emb, Tag.ADVERSARIAL)
        ds = EmbeddingDataset(d=ds.d, records=records, layer_tag="L+1")
        for name in ("data.lemb", "data.jsonl"):
            with self.subTest(name=name):
                write_dataset(ds, self.dir / name)
                self.assertEqual(read_dataset(self.dir / name), ds)

    def test_jsonl_without_header(self):
        path = self.dir / "plain.jsonl"
        path.write_text(
            json.dumps({"id": "a", "y": 1, "y_hat": 1, "tag": "clean", "emb": [0.1, 0.2]}) + "\n"
        )
        ds = read_dataset(path)
        self.assertEqual((ds.d, ds.layer_tag, len(ds)), (2, "L", 1))
        self.assertEqual(ds.records[0].emb.tolist(), [0.1, 0.2])

    def test_jsonl_error_names_the_record(self):
        path = self.dir / "bad.jsonl"
        path.write_text(json.dumps({"id": "nope", "y": 1, "tag": "clean", "emb": [0.1]}) + "\n")
        with self.assertRaisesMessage(ValidationError, "'nope'"):
            read_dataset(path)

    def test_jsonl_dimension_mismatch(self):
        path = self.dir / "mixed.jsonl"
        rows = [
            {"id": "a", "y": 0, "y_hat": 0, "tag": "train", "emb": [0.0, 1.0]},
            {"id": "b", "y": 0, "y_hat": 0, "tag": "train", "emb": [0.0]},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with self.assertRaisesMessage(DimensionMismatchError, "'b'"):
            read_dataset(path)

    def test_truncated_binary_reports_offset(self):
        path = self.dir / "data.lemb"
        write_dataset(make_dataset(), path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-3])
        with self.assertRaisesMessage(FormatError, "byte offset"):
            read_dataset(path)
        path.write_bytes(raw + b"\0")
        with self.assertRaisesMessage(FormatError, "trailing"):
            read_dataset(path)
        path.write_bytes(b"XEMB" + raw[4:])
        with self.assertRaisesMessage(FormatError, "magic"):
            read_dataset(path)

    def test_embedding_beyond_float32_is_not_written(self):
        path = self.dir / "big.lemb"
        rows = [EmbeddingRecord(id="huge", y=0, y_hat=0, emb=[1e39, 0.1], tag=Tag.TRAIN)]
        with self.assertRaisesMessage(ValidationError, "'huge'"):
            write_dataset(EmbeddingDataset(d=2, records=rows), path)
        self.assertFalse(path.exists())
        jsonl = self.dir / "big.jsonl"
        write_dataset(EmbeddingDataset(d=2, records=rows), jsonl)
        self.assertEqual(read_dataset(jsonl).records[0].emb[0], 1e39)

    def test_empty_dataset_is_not_written(self):
        with self.assertRaises(EmptyInputError):
            write_dataset(EmbeddingDataset(d=2, records=()), self.dir / "empty.lemb")

    def test_logprob_reader(self):
        path = self.dir / "lp.jsonl"
        rows = [{"id": "a", "logps": [-0.5, -1.5], "tag": "clean"}, {"id": "b", "logps": [0.0]}]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        records = read_logprobs(path)
        self.assertEqual([r.id for r in records], ["a", "b"])
        self.assertIs(records[0].tag, Tag.CLEAN)
        self.assertIsNone(records[1].tag)

        path.write_text(json.dumps({"id": "c", "logps": [0.3]}) + "\n")
        with self.assertRaisesMessage(ValidationError, "'c'"):
            read_logprobs(path)


class SplitTests(SimpleTestCase):
    def test_subsets_are_disjoint_and_ordered(self):
        ds = make_dataset(n=100)
        x1, x2 = scenario1_split(ds, SplitSpec(seed=7, n1=30, n2=50))
        self.assertEqual((len(x1), len(x2)), (30, 50))
        self.assertFalse(set(x1.ids) & set(x2.ids))
        position = {rid: i for i, rid in enumerate(ds.ids)}
        for subset in (x1, x2):
            index = [position[rid] for rid in subset.ids]
            self.assertEqual(index, sorted(index))
        self.assertTrue(all(r.tag is Tag.CLEAN for r in x2))
        self.assertTrue(all(r.tag is Tag.TRAIN for r in x1))

    def test_split_is_deterministic(self):
        ds = make_dataset(n=100)
        spec = SplitSpec(seed=3, n1=20, n2=20)
        self.assertEqual(scenario1_split(ds, spec), scenario1_split(ds, spec))
        other = scenario1_split(ds, SplitSpec(seed=4, n1=20, n2=20))
        self.assertNotEqual(scenario1_split(ds, spec)[0].ids, other[0].ids)

    def test_full_partition(self):
        ds = make_dataset(n=10)
        x1, x2 = scenario1_split(ds, SplitSpec(seed=0, n1=4, n2=6))
        self.assertEqual(sorted(x1.ids + x2.ids), sorted(ds.ids))

    def test_sizes_are_checked(self):
        with self.assertRaisesMessage(SplitSizeError, "11"):
            scenario1_split(make_dataset(n=10), SplitSpec(seed=0, n1=6, n2=5))
        with self.assertRaises(SplitSizeError):
            SplitSpec(seed=0, n1=0, n2=3)

    def test_seed_range_is_a_validation_error(self):
        for seed in (-1, 2**64):
            with self.subTest(seed=seed), self.assertRaises(ValidationError) as ctx:
                SplitSpec(seed=seed, n1=1, n2=1)
            self.assertNotIsInstance(ctx.exception, SplitSizeError)

    def test_random_sizes_give_disjoint_subsets(self):
        rng = np.random.default_rng(17)
        for trial in range(100):
            n = int(rng.integers(2, 60))
            n1 = int(rng.integers(1, n))
            n2 = int(rng.integers(1, n - n1 + 1))
            seed = int(rng.integers(0, 2**63))
            with self.subTest(n=n, n1=n1, n2=n2, seed=seed):
                ds = make_dataset(n=n, seed=trial)
                x1, x2 = scenario1_split(ds, SplitSpec(seed=seed, n1=n1, n2=n2))
                self.assertEqual((len(x1), len(x2)), (n1, n2))
                self.assertFalse(set(x1.ids) & set(x2.ids))
                self.assertTrue(set(x1.ids) | set(x2.ids) <= set(ds.ids))
