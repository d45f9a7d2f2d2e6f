# tests/test_config.py
"""
Unit tests for run configuration, stage state and the response cache.
"""
import json
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.run_config import load_run_config
from config.settings import DEFAULT_DICTIONARY_PATH, DEMO_CONFIG_PATH, validate_settings
from src.utils.errors import ConfigError
from src.utils.file_utils import fingerprint
from src.utils.response_cache import ResponseCache
from src.utils.state_manager import STATE_FILE_NAME, PipelineState

DEMO_CORPUS = (Path(DEMO_CONFIG_PATH).parent / "corpus.jsonl").resolve()


class TestRunConfig(unittest.TestCase):
    """Test cases for loading and overriding run configs."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def write(self, text):
        path = self.temp_dir / "run.yaml"
        path.write_text(text, encoding="utf-8")
        return path

    def test_demo_config(self):
        config = load_run_config()
        self.assertEqual(config.provider_names, ["mock-reverse", "mock-truncate", "mock-echo"])
        self.assertEqual(config.alpha, 0.05)
        self.assertTrue(config.corpus.is_absolute())
        self.assertTrue(config.corpus.exists())
        self.assertEqual(config.providers[2].model, "mock-echo")
        self.assertEqual(config.providers[0].model, "mock")

    def test_defaults_and_relative_paths(self):
        shutil.copy(DEMO_CORPUS, self.temp_dir / "corpus.jsonl")
        config = load_run_config(self.write("corpus: corpus.jsonl\noutput_dir: results\n"))
        self.assertEqual(config.corpus, (self.temp_dir / "corpus.jsonl").resolve())
        self.assertEqual(config.output_dir, (self.temp_dir / "results").resolve())
        self.assertEqual(config.dictionary, DEFAULT_DICTIONARY_PATH)
        self.assertEqual(config.providers, ())

    def test_all_errors_reported_together(self):
        path = self.write(
            f"corpus: {DEMO_CORPUS}\n"
            "alpha: 1.5\n"
            "gender_threshold: 0.4\n"
            "colour: blue\n"
            "providers:\n"
            "  - name: human\n    kind: mock\n"
            "  - name: x\n    kind: cohere\n"
            "  - name: y\n    kind: anthropic\n    model: m\n    api_key_env: sk-live-secret-value\n"
            "  - name: z\n    kind: mock\n    params:\n      style: shuffle\n"
        )
        with self.assertRaises(ConfigError) as ctx:
            load_run_config(path)
        message = str(ctx.exception)
        for fragment in ("alpha", "gender_threshold", "colour", "'human'", "'kind'",
                         "api_key_env", "mock style"):
            self.assertIn(fragment, message)
        self.assertNotIn("sk-live-secret-value", message)

    def test_duplicate_provider_names(self):
        path = self.write(
            f"corpus: {DEMO_CORPUS}\nproviders:\n"
            "  - name: m\n    kind: mock\n"
            "  - name: m\n    kind: mock\n"
        )
        with self.assertRaises(ConfigError):
            load_run_config(path)

    def test_missing_files(self):
        with self.assertRaises(ConfigError):
            load_run_config(self.temp_dir / "absent.yaml")
        with self.assertRaises(ConfigError):
            load_run_config(self.write("corpus: nowhere.jsonl\n"))
        with self.assertRaises(ConfigError):
            load_run_config(self.write("- just\n- a list\n"))

    def test_overrides_and_selection(self):
        config = load_run_config()
        updated = config.with_overrides(alpha=0.01, equal_var=None, output_dir=self.temp_dir)
        self.assertEqual(updated.alpha, 0.01)
        self.assertFalse(updated.equal_var)
        self.assertEqual(updated.output_dir, self.temp_dir.resolve())
        with self.assertRaises(ConfigError):
            config.with_overrides(gender_threshold=0.5)
        selected = config.select_providers(["mock-echo", "mock-reverse"])
        self.assertEqual(selected.provider_names, ["mock-reverse", "mock-echo"])
        self.assertIs(config.select_providers(None), config)
        with self.assertRaises(ConfigError):
            config.select_providers(["gpt-9"])

    def test_to_dict_is_json_serializable(self):
        data = load_run_config().to_dict()
        self.assertEqual(data["providers"][0]["name"], "mock-reverse")
        json.dumps(data)

    def test_environment_settings_are_valid(self):
        _, errors = validate_settings()
        self.assertEqual(errors, [])


class TestPipelineState(unittest.TestCase):
    """Test cases for stage fingerprints and output hashes."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.output = self.temp_dir / "a.csv"
        self.output.write_text("x\n1\n", encoding="utf-8")

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_up_to_date_rules(self):
        state = PipelineState(self.temp_dir)
        key = fingerprint({"stage": "extract", "corpus": "abc"})
        self.assertFalse(state.is_up_to_date("extract", key))
        state.record_stage("extract", key, [self.output], {"human": 1})

        reloaded = PipelineState(self.temp_dir)
        self.assertTrue(reloaded.is_up_to_date("extract", key))
        self.assertFalse(reloaded.is_up_to_date("extract", fingerprint({"stage": "extract"})))
        self.assertEqual(reloaded.get_stage("extract")["counts"], {"human": 1})
        self.assertEqual(list(reloaded.get_stage("extract")["outputs"]), ["a.csv"])

        self.output.write_text("x\n2\n", encoding="utf-8")
        self.assertFalse(reloaded.is_up_to_date("extract", key))
        self.output.unlink()
        self.assertFalse(reloaded.is_up_to_date("extract", key))

    def test_backup_recovery(self):
        state = PipelineState(self.temp_dir)
        state.record_stage("gender", "k1", [self.output])
        state.record_stage("extract", "k2", [self.output])
        (self.temp_dir / STATE_FILE_NAME).write_text("{not json", encoding="utf-8")
        recovered = PipelineState(self.temp_dir)
        self.assertEqual(recovered.get_stage("gender")["fingerprint"], "k1")

    def test_invalidate(self):
        state = PipelineState(self.temp_dir)
        state.record_stage("gender", "k1", [self.output])
        state.invalidate("gender")
        self.assertIsNone(PipelineState(self.temp_dir).get_stage("gender"))
        state.invalidate("missing")
        self.assertEqual(PipelineState(self.temp_dir).get_stage("gender"), None)


class TestResponseCache(unittest.TestCase):
    """Test cases for the on-disk response cache."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.cache = ResponseCache(self.temp_dir / "cache")

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_put_get(self):
        key = fingerprint(["p", "m", "prompt"])
        self.assertIsNone(self.cache.get(key))
        self.cache.put(key, {"status": "ok", "response_text": "text"})
        self.assertIn(key, self.cache)
        self.assertEqual(len(self.cache), 1)
        record = self.cache.get(key)
        self.assertEqual(record["response_text"], "text")
        self.assertEqual(record["fingerprint"], key)
        self.assertIn("created", record)
        self.assertEqual(self.cache.stats["hits"], 1)
        self.assertEqual(self.cache.stats["misses"], 1)

    def test_corrupt_entry_is_a_miss(self):
        key = fingerprint(["p", "m", "other"])
        self.cache.put(key, {"status": "ok"})
        path = self.temp_dir / "cache" / key[:2] / f"{key}.json"
        path.write_text("{truncated", encoding="utf-8")
        self.assertIsNone(self.cache.get(key))
        self.assertEqual(self.cache.stats["corrupt"], 1)


if __name__ == '__main__':
    unittest.main()
