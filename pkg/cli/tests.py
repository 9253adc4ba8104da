import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from cli.manifest import file_sha256
from ingest.formats import read_dataset, write_dataset
from ingest.models import EmbeddingDataset, EmbeddingRecord, Tag


def records(X, y, tag, prefix):
    return [
        EmbeddingRecord(id=f"{prefix}{i}", y=int(c), y_hat=int(c), emb=x, tag=tag)
        for i, (x, c) in enumerate(zip(X, y))
    ]


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        rng = np.random.default_rng(0)
        y = np.repeat([0, 1], 30)
        X = rng.standard_normal((60, 3)) + y[:, None] * 4
        self.train = self.write("train.jsonl", records(X, y, Tag.TRAIN, "t"))
        y_test = np.repeat([0, 1], 10)
        X_test = rng.standard_normal((20, 3)) + y_test[:, None] * 4
        self.test_set = self.write("test.jsonl", records(X_test, y_test, Tag.CLEAN, "x"))

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, rows, d=3, layer_tag="L"):
        path = self.dir / name
        write_dataset(EmbeddingDataset(d=d, records=rows, layer_tag=layer_tag), path)
        return path

    def call(self, name, out_dir=None, **options):
        stdout = StringIO()
        options.setdefault("output_dir", str(out_dir or self.dir / "runs"))
        call_command(name, stdout=stdout, verbosity=0, **options)
        return stdout.getvalue()

    def assertExitCode(self, code, name, **options):
        with self.assertRaises(CommandError) as ctx:
            self.call(name, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return str(ctx.exception)

    def manifest(self, command, out_dir=None):
        return json.loads((Path(out_dir or self.dir / "runs") / f"{command}.manifest.json").read_text())

    def pipeline(self, work):
        """split -> attack stand-in -> fit -> score -> eval, all artifacts under ``work``."""
        work.mkdir()
        runs = work / "runs"
        x1, x2 = work / "x1.jsonl", work / "x2.jsonl"
        self.call("split", runs, input=str(self.test_set), n1=8, n2=8, seed=3, out_x1=str(x1), out_x2=str(x2))
        attacked = [
            EmbeddingRecord(r.id, r.y, r.y_hat, r.emb + 5.0, Tag.ADVERSARIAL) for r in read_dataset(x1)
        ]
        evaluation = work / "eval.jsonl"
        write_dataset(EmbeddingDataset(d=3, records=list(read_dataset(x2)) + attacked), evaluation)

        for scorer, model in (("hm", work / "hm_model"), ("mahalanobis", work / "maha.lgm")):
            self.call("fit", runs, scorer=scorer, input=str(self.train), k=200, seed=1, model_out=str(model))
            self.call(
                "score", runs, scorer=scorer, model=str(model), input=str(evaluation), out=str(work / f"{scorer}.csv")
            )
        self.call(
            "eval", runs, scores=[str(work / "hm.csv"), str(work / "mahalanobis.csv")], out=str(work / "report.json")
        )


class PipelineTests(CommandTestCase):
    def test_pipeline_is_byte_identical_on_rerun(self):
        first, second = self.dir / "first", self.dir / "second"
        self.pipeline(first)
        self.pipeline(second)
        names = [
            "x1.jsonl",
            "x2.jsonl",
            "hm_model/manifest.json",
            "hm_model/class_0.lhm",
            "hm_model/class_1.lhm",
            "maha.lgm",
            "hm.csv",
            "mahalanobis.csv",
            "hm.meta.json",
            "mahalanobis.meta.json",
            "report.json",
        ]
        for name in names:
            with self.subTest(artifact=name):
                self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())
        hm = pd.read_csv(first / "hm.csv")
        self.assertTrue(hm["score"].between(-1, 0).all())
        self.assertEqual(int(hm["is_adversarial"].sum()), 8)
        manifest = self.manifest("score", first / "runs")
        self.assertEqual(len(manifest["inputs"]), 2)
        self.assertIn("created_at", manifest)

    def test_report_metadata_names_scorer_seed_and_datasets(self):
        work = self.dir / "work"
        self.pipeline(work)
        hm, maha = json.loads((work / "report.json").read_text())
        evaluation_hash = file_sha256(work / "eval.jsonl")
        self.assertEqual(hm["metadata"]["scorer"], "hm")
        self.assertEqual(hm["metadata"]["seed"], 1)
        self.assertEqual(hm["metadata"]["layer_tag"], "L")
        self.assertEqual(hm["metadata"]["datasets"], {"eval.jsonl": evaluation_hash})
        self.assertEqual(hm["metadata"]["model"], file_sha256(work / "hm_model"))
        self.assertEqual(hm["metadata"]["sha256"], file_sha256(work / "hm.csv"))
        self.assertEqual(maha["metadata"]["scorer"], "mahalanobis")
        self.assertIsNone(maha["metadata"]["seed"])
        self.assertEqual(maha["metadata"]["datasets"], {"eval.jsonl": evaluation_hash})


class SplitCommandTests(CommandTestCase):
    def test_split_writes_both_subsets(self):
        x1, x2 = self.dir / "x1.lemb", self.dir / "x2.lemb"
        self.call("split", input=str(self.test_set), n1=4, n2=4, seed=0, out_x1=str(x1), out_x2=str(x2))
        self.assertEqual((len(read_dataset(x1)), len(read_dataset(x2))), (4, 4))
        self.assertEqual(self.manifest("split")["parameters"], {"seed": 0, "n1": 4, "n2": 4})

    def test_oversized_split(self):
        message = self.assertExitCode(
            2, "split", input=str(self.test_set), n1=15, n2=10, seed=0, out_x1="a.jsonl", out_x2="b.jsonl"
        )
        self.assertIn("25", message)
        self.assertIn("20", message)


class FitCommandTests(CommandTestCase):
    def test_hm_directory_and_default_k(self):
        model = self.dir / "model"
        with self.settings(DEPTHGUARD={**settings.DEPTHGUARD, "HM_K": 10000}):
            self.call("fit", scorer="hm", input=str(self.train), model_out=str(model))
        self.assertEqual(sorted(p.name for p in model.glob("*.lhm")), ["class_0.lhm", "class_1.lhm"])
        parameters = self.manifest("fit")["parameters"]
        self.assertEqual(parameters["k"], 10000)
        self.assertEqual(parameters["ns"], 32)

    def test_single_sample_class(self):
        rows = records(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [5.0, 5.0, 5.0]]), [0, 0, 1], Tag.TRAIN, "t")
        path = self.write("tiny.jsonl", rows)
        self.assertExitCode(2, "fit", scorer="mahalanobis", input=str(path), model_out=str(self.dir / "m.lgm"))


class ScoreCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        self.model = self.dir / "maha.lgm"
        self.call("fit", scorer="mahalanobis", input=str(self.train), model_out=str(self.model))

    def test_language_model_scores(self):
        path = self.dir / "lp.jsonl"
        rows = [
            {"id": "a", "logps": [-0.5, -1.0], "tag": "clean"},
            {"id": "b", "logps": [-3.0], "tag": "adversarial"},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        out = self.dir / "lm.csv"
        self.call("score", scorer="lm", logprobs=str(path), out=str(out))
        self.assertEqual(out.read_text().splitlines(), ["id,score,is_adversarial", "a,1.5,0", "b,3.0,1"])

    def test_dimension_mismatch(self):
        path = self.write("wide.jsonl", records(np.zeros((2, 4)), [0, 1], Tag.CLEAN, "w"), d=4)
        self.assertExitCode(2, "score", scorer="mahalanobis", model=str(self.model), input=str(path), out="s.csv")

    def test_unknown_class(self):
        rows = [EmbeddingRecord("stray", None, 7, [0.0, 0.0, 0.0], Tag.ADVERSARIAL)]
        path = self.write("stray.jsonl", rows)
        message = self.assertExitCode(
            2, "score", scorer="mahalanobis", model=str(self.model), input=str(path), out="s.csv"
        )
        self.assertIn("'stray'", message)

    def test_layer_mismatch_warns(self):
        self.call("fit", scorer="hm", input=str(self.train), k=20, model_out=str(self.dir / "hm"))
        path = self.write("logits.jsonl", records(np.zeros((2, 3)), [0, 1], Tag.CLEAN, "c"), layer_tag="L+1")
        with self.assertLogs("cli", level="WARNING"):
            call_command(
                "score",
                scorer="hm",
                model=str(self.dir / "hm"),
                input=str(path),
                out=str(self.dir / "s.csv"),
                output_dir=str(self.dir / "runs"),
                stdout=StringIO(),
            )


class EvalCommandTests(CommandTestCase):
    def scores(self, name, clean, adversarial):
        path = self.dir / name
        rows = [(f"c{i}", s, 0) for i, s in enumerate(clean)] + [(f"a{i}", s, 1) for i, s in enumerate(adversarial)]
        pd.DataFrame(rows, columns=["id", "score", "is_adversarial"]).to_csv(path, index=False)
        return str(path)

    def test_separated_and_derived_tables(self):
        perfect = self.scores("perfect.csv", [0.1, 0.2], [0.8, 0.9])
        derived = self.scores("derived.csv", [0.1, 0.3], [0.2, 0.4])
        out = self.dir / "report.json"
        printed = self.call("eval", scores=[perfect, derived], out=str(out), curves_dir=str(self.dir / "curves"))
        header, perfect_row, derived_row = printed.splitlines()
        self.assertEqual(header.split()[1:], ["AUROC", "FPR", "AUPR-IN", "AUPR-OUT", "Err"])
        self.assertEqual(perfect_row.split()[1:3], ["100.0", "0.0"])
        self.assertEqual(derived_row.split()[1], "75.0")
        reports = json.loads(out.read_text())
        self.assertEqual(reports[1]["auroc"], 0.75)
        self.assertEqual(reports[0]["r"], 0.9)
        self.assertTrue((self.dir / "curves" / "derived.roc.csv").exists())

    def test_single_class_and_missing_file(self):
        self.assertExitCode(2, "eval", scores=[self.scores("one.csv", [], [0.3, 0.4])])
        self.assertExitCode(2, "eval", scores=[str(self.dir / "missing.csv")])

    def test_internal_error(self):
        path = self.scores("ok.csv", [0.1], [0.9])
        with mock.patch("cli.management.commands.eval.full_report", side_effect=RuntimeError("boom")):
            with self.assertLogs("cli", level="ERROR"):
                self.assertExitCode(1, "eval", scores=[path])

    def test_summarize_reports(self):
        first, second = self.dir / "r1.json", self.dir / "r2.json"
        self.call("eval", scores=[self.scores("s1.csv", [0, 1], [2, 3])], out=str(first))
        self.call("eval", scores=[self.scores("s2.csv", [0, 2], [1, 3])], out=str(second))
        out = self.dir / "summary.json"
        printed = self.call("summarize", reports=[str(first), str(second)], out=str(out))
        summary = json.loads(out.read_text())
        self.assertAlmostEqual(summary["auroc"]["mean"], 0.875)
        self.assertIn("auroc", printed)


class DecideCommandTests(CommandTestCase):
    def test_fixed_and_calibrated_threshold(self):
        path = self.dir / "scores.csv"
        path.write_text("id,score,is_adversarial\na,1.0,0\nb,2.0,0\nc,3.0,1\n")
        out = self.dir / "decisions.csv"
        self.call("decide", scores=str(path), gamma=2.0, out=str(out))
        self.assertEqual(out.read_text().splitlines()[1:], ["a,1.0,0", "b,2.0,1", "c,3.0,1"])
        self.call("decide", scores=str(path), calibrate_q=0.5, out=str(out))
        self.assertEqual(self.manifest("decide")["parameters"]["gamma"], 1.0)


class LayersCommandTests(CommandTestCase):
    def cloud(self, name, X):
        return self.write(name, records(X, [0] * len(X), Tag.CLEAN, "p")).name

    def test_layer_distances(self):
        base = np.random.default_rng(1).standard_normal((12, 3))
        manifest = {
            "layers": [
                {"tag": "layer1", "clean": self.cloud("c1.jsonl", base), "adversarial": self.cloud("a1.jsonl", base)},
                {
                    "tag": "layer2",
                    "clean": self.cloud("c2.jsonl", base),
                    "adversarial": self.cloud("a2.jsonl", base + [3.0, 4.0, 0.0]),
                    "train": self.cloud("t2.jsonl", np.vstack([base, base])),
                },
            ]
        }
        path = self.dir / "layers.json"
        path.write_text(json.dumps(manifest))
        out = self.dir / "layers.csv"
        self.call("layers", manifest=str(path), out=str(out))
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["layer_tag", "w1", "w1_train_clean", "w1_train_adv"])
        self.assertEqual(frame["w1"][0], 0.0)
        self.assertAlmostEqual(frame["w1"][1], 5.0, delta=1e-9)
        self.assertTrue(np.isnan(frame["w1_train_clean"][0]))

    def test_unequal_cloud_sizes(self):
        base = np.zeros((4, 3))
        manifest = {"layers": [{"tag": "L", "clean": self.cloud("c.jsonl", base), "adversarial": self.cloud("a.jsonl", base[:3])}]}
        path = self.dir / "layers.json"
        path.write_text(json.dumps(manifest))
        self.assertExitCode(2, "layers", manifest=str(path), out=str(self.dir / "o.csv"))


class BenchCommandTests(CommandTestCase):
    def test_small_grid_writes_both_csvs(self):
        out = self.dir / "bench"
        self.call("bench", out=str(out), dims=(4,), sizes=(20,), k_values=(5,), repeats=2)
        self.assertEqual(len(pd.read_csv(out / "timings.csv")), 12)
        self.assertEqual(len(pd.read_csv(out / "summary.csv")), 6)
        self.assertEqual(list(pd.read_csv(out / "scaling.csv").columns), ["check", "K", "d", "n", "ratio"])
        self.assertEqual(self.manifest("bench")["parameters"]["grid"], "desk")

    def test_unwritable_output(self):
        blocker = self.dir / "file"
        blocker.write_text("")
        self.assertExitCode(2, "bench", out=str(blocker / "bench"), dims=(4,), sizes=(20,), k_values=(5,), repeats=2)
