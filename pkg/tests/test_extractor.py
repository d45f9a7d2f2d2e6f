# tests/test_extractor.py
"""
Unit tests for tokenization, composites and feature extraction.
"""
import math
import random
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import DEFAULT_COMPOSITES_PATH, DEFAULT_DICTIONARY_PATH, DEMO_CONFIG_PATH
from src.services.corpus import read_corpus
from src.services.extractor import (
    COMPOSITE_FEATURES, DICTIONARY_FEATURES, FEATURE_GROUPS, FEATURE_SCHEMA, CompositeDef,
    FeatureTable, compute_composites, count_categories, extract_corpus, extract_features,
    load_composites, tokenize, validate_composites,
)
from src.services.lexicon import PatternKind, load_dictionary, parse_dictionary
from src.services.matcher import compile_matcher
from src.utils.errors import CompositeError, ConfigError

DEMO_CORPUS = Path(DEMO_CONFIG_PATH).parent / "corpus.jsonl"

SMALL_DICTIONARY = (
    "%\n1\taffiliation\n2\tinsight\n3\ttone_pos\n4\ttone_neg\n%\n"
    "we\t1\n"
    "together\t1\n"
    "know*\t2\n"
    "good\t3\n"
    "bad\t4\n"
    "kind of\t2\n"
)


def oracle_counts(lexicon, tokens):
    """Count-and-divide reference: distinct positions per category, by linear scan."""
    counts = {}
    for position, token in enumerate(tokens):
        ids = set()
        for entry in lexicon.entries:
            pattern = entry.pattern
            if pattern.kind is PatternKind.EXACT and token == pattern.text:
                ids |= entry.category_ids
            elif pattern.kind is PatternKind.STEM and token.startswith(pattern.text):
                ids |= entry.category_ids
            elif pattern.kind is PatternKind.PHRASE:
                parts = pattern.phrase_tokens
                window = tokens[position:position + len(parts)]
                if len(window) == len(parts) and all(
                    word.startswith(text) if is_stem else word == text
                    for word, (text, is_stem) in zip(window, parts)
                ):
                    ids |= entry.category_ids
        for category_id in ids:
            counts[lexicon.name_for(category_id)] = counts.get(lexicon.name_for(category_id), 0) + 1
    return counts


class TestTokenize(unittest.TestCase):
    """Test cases for the tokenizer."""

    def test_tokens(self):
        text = "Don't stop—the state-of-the-art model’s 3 results!"
        self.assertEqual(
            tokenize(text),
            ["don't", "stop", "the", "state-of-the-art", "model's", "3", "results"],
        )

    def test_empty_and_punctuation(self):
        self.assertEqual(tokenize(""), [])
        self.assertEqual(tokenize(" -- !!! ... "), [])


class TestComposites(unittest.TestCase):
    """Test cases for summary composites."""

    def test_bundled_definitions(self):
        defs = {d.name: d for d in load_composites(DEFAULT_COMPOSITES_PATH)}
        self.assertEqual(set(defs), set(COMPOSITE_FEATURES))
        self.assertEqual(defs["Tone"].intercept, 50.0)
        self.assertEqual(dict(defs["Tone"].terms), {"tone_pos": 5.0, "tone_neg": -5.0})
        validate_composites(list(defs.values()), load_dictionary(DEFAULT_DICTIONARY_PATH))

    def test_affine_value_and_clamp(self):
        tone = CompositeDef("Tone", 50.0, (("tone_pos", 5.0), ("tone_neg", -5.0)))
        self.assertEqual(compute_composites({"tone_pos": 2.0, "tone_neg": 1.0}, [tone]), {"Tone": 55.0})
        self.assertEqual(compute_composites({"tone_pos": 20.0, "tone_neg": 0.0}, [tone]), {"Tone": 100.0})
        self.assertEqual(compute_composites({"tone_pos": 0.0, "tone_neg": 30.0}, [tone]), {"Tone": 0.0})

    def test_missing_category(self):
        clout = CompositeDef("Clout", 50.0, (("we", 1.0),))
        with self.assertRaises(CompositeError):
            compute_composites({"you": 1.0}, [clout])
        with self.assertRaises(CompositeError):
            validate_composites([clout], parse_dictionary(SMALL_DICTIONARY))

    def test_invalid_yaml_definition(self):
        temp_dir = tempfile.mkdtemp()
        try:
            path = Path(temp_dir) / "bad.yaml"
            path.write_text("composites:\n  - intercept: 3\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_composites(path)
        finally:
            shutil.rmtree(temp_dir)


class TestExtractFeatures(unittest.TestCase):
    """Test cases for per-document features."""

    def setUp(self):
        self.lexicon = parse_dictionary(SMALL_DICTIONARY)
        self.matcher = compile_matcher(self.lexicon)
        self.composites = [CompositeDef("Tone", 50.0, (("tone_pos", 5.0), ("tone_neg", -5.0)))]

    def test_schema_order_and_values(self):
        vector = extract_features(
            self.matcher, self.composites, "We know it is good, we work together. Kind of bad?"
        )
        self.assertEqual(len(vector.values), len(FEATURE_SCHEMA))
        self.assertEqual(vector["Segment"], 1.0)
        self.assertEqual(vector["WC"], 11.0)
        self.assertAlmostEqual(vector["affiliation"], 300.0 / 11, places=12)
        self.assertAlmostEqual(vector["insight"], 200.0 / 11, places=12)
        self.assertAlmostEqual(vector["Tone"], 50.0, places=12)
        self.assertEqual(vector["politic"], 0.0)
        self.assertFalse(vector.degenerate)

    def test_undefined_composite_is_nan(self):
        vector = extract_features(self.matcher, self.composites, "good")
        self.assertTrue(math.isnan(vector["Analytic"]))
        self.assertTrue(math.isnan(vector["Clout"]))
        self.assertEqual(vector["Tone"], 100.0)

    def test_zero_word_document_is_degenerate(self):
        for text in ("", "!!! ..."):
            vector = extract_features(self.matcher, self.composites, text, "r1")
            self.assertTrue(vector.degenerate)
            self.assertEqual(vector["WC"], 0.0)
            self.assertEqual(vector["insight"], 0.0)

    def test_scale_invariance(self):
        matcher = compile_matcher(self.lexicon.without_phrases())
        text = "We know that good things and bad things happen together."
        once = extract_features(matcher, self.composites, text)
        twice = extract_features(matcher, self.composites, text + " " + text)
        self.assertEqual(twice["WC"], 2 * once["WC"])
        for feature in DICTIONARY_FEATURES:
            self.assertAlmostEqual(once[feature], twice[feature], places=12)

    def test_counts_add_over_concatenated_documents(self):
        rng = random.Random(23)
        lexicon = load_dictionary(DEFAULT_DICTIONARY_PATH).without_phrases()
        matcher = compile_matcher(lexicon)
        vocabulary = [e.pattern.text for e in lexicon.entries if e.pattern.kind is PatternKind.EXACT]
        vocabulary += ["model", "zebra", "knowledge", "of"]
        for _ in range(200):
            first = tokenize(" ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 25))))
            second = tokenize(" ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 25))))
            combined = count_categories(matcher, first + second)
            expected = dict(count_categories(matcher, first))
            for category_id, count in count_categories(matcher, second).items():
                expected[category_id] = expected.get(category_id, 0) + count
            self.assertEqual(combined, expected)

    def test_phrase_counts_add_when_no_phrase_spans_the_join(self):
        first = tokenize("we know it was kind of good")
        second = tokenize("bad things together")
        combined = count_categories(self.matcher, first + second)
        expected = dict(count_categories(self.matcher, first))
        for category_id, count in count_categories(self.matcher, second).items():
            expected[category_id] = expected.get(category_id, 0) + count
        self.assertEqual(combined, expected)

    def test_boundedness_on_random_documents(self):
        rng = random.Random(11)
        lexicon = load_dictionary(DEFAULT_DICTIONARY_PATH)
        matcher = compile_matcher(lexicon)
        composites = load_composites(DEFAULT_COMPOSITES_PATH)
        vocabulary = [e.pattern.text for e in lexicon.entries if e.pattern.kind is PatternKind.EXACT]
        vocabulary += ["model", "data", "zebra", "quux", "of", "the"]
        for _ in range(1000):
            words = [rng.choice(vocabulary) for _ in range(rng.randint(1, 40))]
            vector = extract_features(matcher, composites, " ".join(words))
            for feature in DICTIONARY_FEATURES:
                self.assertGreaterEqual(vector[feature], 0.0)
                self.assertLessEqual(vector[feature], 100.0)
            for feature in COMPOSITE_FEATURES:
                self.assertGreaterEqual(vector[feature], 0.0)
                self.assertLessEqual(vector[feature], 100.0)

    def test_bundled_corpus_matches_count_and_divide_oracle(self):
        lexicon = load_dictionary(DEFAULT_DICTIONARY_PATH)
        matcher = compile_matcher(lexicon)
        composites = load_composites(DEFAULT_COMPOSITES_PATH)
        for record in read_corpus(DEMO_CORPUS):
            tokens = tokenize(record.abstract)
            counts = oracle_counts(lexicon, tokens)
            vector = extract_features(matcher, composites, record.abstract, record.id)
            self.assertEqual(vector["WC"], float(len(tokens)))
            for feature in DICTIONARY_FEATURES:
                expected = 100.0 * counts.get(feature, 0) / len(tokens)
                self.assertAlmostEqual(vector[feature], expected, delta=1e-12, msg=f"{record.id}/{feature}")


class TestFeatureTable(unittest.TestCase):
    """Test cases for corpus extraction and CSV persistence."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.matcher = compile_matcher(parse_dictionary(SMALL_DICTIONARY))
        self.documents = [
            ("r1", "human", "We know this is good."),
            ("r2", "human", "Bad news, kind of."),
            ("r3", "human", ""),
            ("r4", "human", "Together we know more, together we do good work."),
        ]

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_workers_do_not_change_results(self):
        serial = extract_corpus(self.matcher, [], self.documents, workers=1)
        threaded = extract_corpus(self.matcher, [], self.documents, workers=4)
        self.assertEqual(serial, threaded)
        self.assertEqual(serial.record_ids, ["r1", "r2", "r3", "r4"])

    def test_csv_persistence(self):
        table = extract_corpus(self.matcher, [], self.documents)
        path = Path(self.temp_dir) / "features" / "human.csv"
        table.write_csv(path)
        text = path.read_text(encoding="utf-8")
        header = text.split("\n", 1)[0].split(",")
        self.assertEqual(header, ["record_id", "variant"] + list(FEATURE_SCHEMA) + ["degenerate"])
        self.assertIn("NaN", text)

        loaded = FeatureTable.read_csv(path)
        self.assertEqual(loaded.record_ids, table.record_ids)
        for original, restored in zip(table, loaded):
            self.assertEqual(original.degenerate, restored.degenerate)
            for a, b in zip(original.values, restored.values):
                self.assertTrue((math.isnan(a) and math.isnan(b)) or a == b)
        self.assertEqual(loaded.to_csv_text(), text)

    def test_column_skips_degenerate_rows(self):
        table = extract_corpus(self.matcher, [], self.documents)
        self.assertEqual(set(table.column("WC")), {"r1", "r2", "r4"})
        self.assertEqual(set(table.column("WC", include_degenerate=True)), {"r1", "r2", "r3", "r4"})

    def test_groups_partition_schema(self):
        grouped = [f for members in FEATURE_GROUPS.values() for f in members]
        self.assertEqual(sorted(grouped), sorted(FEATURE_SCHEMA))


if __name__ == '__main__':
    unittest.main()
