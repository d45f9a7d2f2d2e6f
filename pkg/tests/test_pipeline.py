# tests/test_pipeline.py
"""
End-to-end tests for the offline demo pipeline, stage skipping and CLI exit codes.
"""
import json
import os
import shutil
import sys
import tempfile
import time
import unittest
from pathlib import Path
from unittest.mock import patch

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import main as cli
from config.run_config import load_run_config
from config.settings import DEMO_CONFIG_PATH
from src.handlers.pipeline_handler import PipelineHandler
from src.services.corpus import read_corpus
from src.services.extractor import FEATURE_SCHEMA
from src.utils.errors import CorpusFormatError, MissingIntermediateError
from src.utils.state_manager import PipelineState

DEMO_CORPUS = Path(DEMO_CONFIG_PATH).parent / "corpus.jsonl"
MODELS = ["mock-reverse", "mock-truncate", "mock-echo"]


def snapshot(directory):
    return {
        path.relative_to(directory).as_posix(): path.read_bytes()
        for path in sorted(Path(directory).rglob("*")) if path.is_file()
    }


def run_cli(argv):
    with patch.object(cli, "LOG_FILE_PATH", ""):
        return cli.main(["--log-level", "WARNING"] + argv)


class TestDemoPipeline(unittest.TestCase):
    """Test cases for the full pipeline on the bundled demo corpus."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.out = self.temp_dir / "out"
        self.config = load_run_config().with_overrides(
            output_dir=self.out, cache_dir=self.temp_dir / "cache"
        )

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_full_run_outputs(self):
        handler = PipelineHandler(self.config)
        started = time.monotonic()
        counts = handler.cmd_pipeline()
        self.assertLess(time.monotonic() - started, 10.0)
        self.assertEqual(handler.get_statistics(), {"stages_run": 5, "stages_skipped": 0})
        self.assertEqual(
            counts["gender"],
            {"records": 20, "Female": 8, "Male": 8, "MixedGender": 2, "Unknown": 2},
        )
        for model in MODELS:
            self.assertEqual(counts["rewrite"][f"{model}_ok"], 20)
            self.assertEqual(counts["extract"][model], 20)

        report = self.out / "report"
        lines = (report / "table_correlation.csv").read_text(encoding="utf-8").rstrip("\n").split("\n")
        self.assertEqual(lines[0], "LIWC," + ",".join(MODELS))
        self.assertEqual(len(lines), len(FEATURE_SCHEMA) + 1)
        self.assertEqual(lines[1], "Segment,NaN,NaN,NaN")
        self.assertTrue(all(len(line.split(",")) == 4 for line in lines))

        header = (report / "table_ttest.csv").read_text(encoding="utf-8").split("\n", 1)[0]
        expected = ["LIWC"] + [c for v in ["Human"] + MODELS for c in (v, f"{v}_sig")]
        self.assertEqual(header.split(","), expected)

        svgs = sorted(p.name for p in report.glob("*.svg"))
        self.assertEqual(len(svgs), 2 * len(MODELS) + 1)
        self.assertIn("ttest_significant.svg", svgs)
        for model in MODELS:
            self.assertIn(f"heatmap_r_{model}.svg", svgs)
            self.assertIn(f"heatmap_p_{model}.svg", svgs)

        manifest = json.loads((report / "manifest.json").read_text(encoding="utf-8"))
        self.assertIn("report/table_correlation.csv", manifest["files"])
        self.assertIn("report/ttest_significant.svg", manifest["files"])
        self.assertEqual(set(manifest["inputs"]), {"config", "corpus", "dictionary", "composites", "name_lexicon"})
        self.assertEqual(manifest["counts"]["stages"]["gender"]["Female"], 8)

        summary = json.loads((self.out / "compare" / "summary.json").read_text(encoding="utf-8"))
        self.assertEqual(summary["alpha"], 0.05)
        self.assertEqual(summary["models"]["mock-reverse"]["shared_records"], 20)

    def test_second_run_skips_and_is_byte_identical(self):
        PipelineHandler(self.config).cmd_pipeline()
        before = snapshot(self.out)
        handler = PipelineHandler(self.config)
        handler.cmd_pipeline()
        self.assertEqual(handler.get_statistics(), {"stages_run": 0, "stages_skipped": 5})
        self.assertEqual(snapshot(self.out), before)

    def test_pipeline_equals_stage_by_stage_run(self):
        handler = PipelineHandler(self.config)
        for stage in ("gender", "rewrite", "extract", "compare", "report"):
            getattr(handler, f"cmd_{stage}")()
        by_stage = snapshot(self.out)

        shutil.rmtree(self.out)
        shutil.rmtree(self.temp_dir / "cache", ignore_errors=True)
        PipelineHandler(self.config).cmd_pipeline()
        piped = snapshot(self.out)

        manifest = "report/manifest.json"
        self.assertEqual(set(piped), set(by_stage))
        for name in piped:
            if name != manifest:
                self.assertEqual(piped[name], by_stage[name], name)
        first, second = (json.loads(files[manifest]) for files in (by_stage, piped))
        first.pop("generated_at")
        second.pop("generated_at")
        self.assertEqual(first, second)

    def test_deleted_intermediate_reruns_only_its_stage(self):
        PipelineHandler(self.config).cmd_pipeline()
        human = self.out / "features" / "human.csv"
        original = human.read_bytes()
        human.unlink()
        handler = PipelineHandler(self.config)
        handler.cmd_pipeline()
        self.assertEqual(handler.get_statistics(), {"stages_run": 1, "stages_skipped": 4})
        self.assertEqual(human.read_bytes(), original)

    def test_force_reruns_every_stage(self):
        PipelineHandler(self.config).cmd_pipeline()
        handler = PipelineHandler(self.config, force=True)
        counts = handler.cmd_pipeline()
        self.assertEqual(handler.get_statistics()["stages_run"], 5)
        self.assertEqual(counts["rewrite"]["cache_hits"], 60)

    def test_alpha_change_reruns_compare_and_report(self):
        PipelineHandler(self.config).cmd_pipeline()
        handler = PipelineHandler(self.config.with_overrides(alpha=0.01))
        handler.cmd_pipeline()
        self.assertEqual(handler.get_statistics(), {"stages_run": 2, "stages_skipped": 3})

    def test_model_selection(self):
        config = self.config.select_providers(["mock-truncate"])
        PipelineHandler(config).cmd_pipeline()
        lines = (self.out / "report" / "table_correlation.csv").read_text(encoding="utf-8").split("\n")
        self.assertEqual(lines[0], "LIWC,mock-truncate")
        self.assertFalse((self.out / "variants" / "mock-reverse.jsonl").exists())

    def test_failed_stage_forgets_its_record(self):
        PipelineHandler(self.config).cmd_gender()
        broken = self.temp_dir / "broken.jsonl"
        broken.write_text("{not json\n", encoding="utf-8")
        handler = PipelineHandler(self.config.with_overrides(corpus=broken))
        with self.assertRaises(CorpusFormatError) as ctx:
            handler.cmd_gender()
        self.assertEqual(ctx.exception.stage, "gender")
        self.assertIsNone(handler.state.get_stage("gender"))
        self.assertIsNone(PipelineState(self.out).get_stage("gender"))

    def test_missing_intermediate(self):
        with self.assertRaises(MissingIntermediateError) as ctx:
            PipelineHandler(self.config).cmd_compare()
        self.assertEqual(ctx.exception.stage, "compare")
        self.assertEqual(ctx.exception.exit_code, 4)


class TestCommandLine(unittest.TestCase):
    """Test cases for CLI exit codes."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def write_config(self, text):
        path = self.temp_dir / "run.yaml"
        path.write_text(text, encoding="utf-8")
        return path

    def test_missing_intermediate_exit_code(self):
        self.assertEqual(run_cli(["--out", str(self.temp_dir / "out"), "report"]), 4)

    def test_missing_credential_exit_code(self):
        config = self.write_config(
            f"corpus: {DEMO_CORPUS.resolve()}\n"
            f"output_dir: {self.temp_dir / 'out'}\n"
            f"cache_dir: {self.temp_dir / 'cache'}\n"
            "providers:\n"
            "  - name: claude\n"
            "    kind: anthropic\n"
            "    model: claude-test\n"
            "    api_key_env: LIWC_AUDIT_MISSING_KEY\n"
        )
        with patch.dict(os.environ, {}):
            os.environ.pop("LIWC_AUDIT_MISSING_KEY", None)
            self.assertEqual(run_cli(["--config", str(config), "pipeline"]), 3)
        self.assertTrue((self.temp_dir / "out" / "corpus_annotated.jsonl").exists())
        self.assertFalse((self.temp_dir / "out" / "variants").exists())

    def test_corrupt_variants_exit_code(self):
        out = self.temp_dir / "out"
        config = self.write_config(
            f"corpus: {DEMO_CORPUS.resolve()}\n"
            f"output_dir: {out}\n"
            f"cache_dir: {self.temp_dir / 'cache'}\n"
            "providers:\n"
            "  - name: mock-reverse\n"
            "    kind: mock\n"
        )
        self.assertEqual(run_cli(["--config", str(config), "pipeline"]), 0)
        (out / "variants" / "mock-reverse.jsonl").write_text("{cut off\n", encoding="utf-8")
        self.assertEqual(run_cli(["--config", str(config), "extract"]), 2)

    def test_invalid_config_exit_code(self):
        config = self.write_config(f"corpus: {DEMO_CORPUS.resolve()}\nalpha: 2\nflavour: x\n")
        self.assertEqual(run_cli(["--config", str(config), "gender"]), 2)

    def test_unknown_model_exit_code(self):
        out = str(self.temp_dir / "out")
        self.assertEqual(run_cli(["--out", out, "gender", "--models", "nope"]), 2)

    def test_gender_stage_via_cli(self):
        out = self.temp_dir / "out"
        self.assertEqual(run_cli(["--out", str(out), "gender", "--threshold", "0.95"]), 0)
        labels = [r.gender.value for r in read_corpus(out / "corpus_annotated.jsonl")]
        self.assertEqual(len(labels), 20)

    def test_import_csv(self):
        csv_path = self.temp_dir / "corpus.csv"
        csv_path.write_text(
            "id,title,abstract,authors\n"
            "a1,First,We study things.,Mary Smith; James Brown\n"
            "a2,Second,\"Results, with commas.\",Yuki Sato\n",
            encoding="utf-8",
        )
        output = self.temp_dir / "corpus.jsonl"
        self.assertEqual(run_cli(["import-csv", str(csv_path), str(output)]), 0)
        records = read_corpus(output)
        self.assertEqual([r.id for r in records], ["a1", "a2"])
        self.assertEqual(records[0].authors, ("Mary Smith", "James Brown"))
        self.assertEqual(records[1].abstract, "Results, with commas.")


if __name__ == '__main__':
    unittest.main()
