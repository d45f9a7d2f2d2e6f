# tests/test_matcher.py
"""
Unit tests for the compiled dictionary matcher against a linear-scan oracle.
"""
import random
import sys
import unittest
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.services.lexicon import Category, Lexicon, LexiconEntry, Pattern, PatternKind, parse_dictionary
from src.services.matcher import compile_matcher, match_phrases, match_token


def scan_token(lexicon, token):
    ids = set()
    for entry in lexicon.entries:
        pattern = entry.pattern
        if pattern.kind is PatternKind.EXACT and token == pattern.text:
            ids |= entry.category_ids
        elif pattern.kind is PatternKind.STEM and token.startswith(pattern.text):
            ids |= entry.category_ids
    return ids


def scan_phrases(lexicon, window):
    found = []
    for index, entry in enumerate(lexicon.entries):
        if entry.pattern.kind is not PatternKind.PHRASE:
            continue
        tokens = entry.pattern.phrase_tokens
        if len(window) < 2 or len(tokens) > len(window):
            continue
        if all(
            window[pos].startswith(text) if is_stem else window[pos] == text
            for pos, (text, is_stem) in enumerate(tokens)
        ):
            found.append((-len(tokens), index, set(entry.category_ids)))
    found.sort(key=lambda item: (item[0], item[1]))
    return [(-neg_len, ids) for neg_len, _, ids in found]


def random_word(rng):
    return "".join(rng.choice("abc") for _ in range(rng.randint(1, 4)))


def random_lexicon(rng):
    categories = tuple(Category(cid, f"c{cid}") for cid in range(1, 6))
    entries, seen = [], set()
    for _ in range(rng.randint(5, 30)):
        roll = rng.random()
        if roll < 0.4:
            raw = random_word(rng)
        elif roll < 0.7:
            raw = random_word(rng) + "*"
        else:
            words = [random_word(rng) for _ in range(rng.randint(2, 3))]
            raw = " ".join(w + "*" if rng.random() < 0.3 else w for w in words)
        pattern = Pattern.parse(raw)
        if pattern.field in seen:
            continue
        seen.add(pattern.field)
        entries.append(LexiconEntry(pattern, frozenset(rng.sample(range(1, 6), rng.randint(1, 3)))))
    return Lexicon(categories, tuple(entries))


class TestMatcher(unittest.TestCase):
    """Test cases for token and phrase matching."""

    def setUp(self):
        self.lexicon = parse_dictionary(
            "%\n1\tcog\n2\tneg\n3\tfunc\n%\n"
            "know\t1\n"
            "know*\t3\n"
            "kno*\t2\n"
            "kind of\t1\n"
            "kind\t3\n"
            "in spite* of\t2\n"
            "in spite\t3\n"
        )
        self.matcher = compile_matcher(self.lexicon)

    def test_exact_and_stem_union(self):
        self.assertEqual(match_token(self.matcher, "know"), {1, 2, 3})
        self.assertEqual(match_token(self.matcher, "knowledge"), {2, 3})
        self.assertEqual(match_token(self.matcher, "knot"), {2})
        self.assertEqual(match_token(self.matcher, "kn"), set())

    def test_match_is_case_insensitive(self):
        self.assertEqual(match_token(self.matcher, "KNOW"), {1, 2, 3})

    def test_phrases_longest_first(self):
        found = match_phrases(self.matcher, ["in", "spiteful", "of", "x"])
        self.assertEqual(found, [(3, {2})])
        found = match_phrases(self.matcher, ["in", "spite", "of"])
        self.assertEqual(found, [(3, {2}), (2, {3})])

    def test_short_window_has_no_phrases(self):
        self.assertEqual(match_phrases(self.matcher, ["kind"]), [])
        self.assertEqual(match_phrases(self.matcher, []), [])

    def test_max_phrase_length(self):
        self.assertEqual(self.matcher.max_phrase_len, 3)
        self.assertEqual(compile_matcher(self.lexicon.without_phrases()).max_phrase_len, 1)

    def test_randomized_against_linear_scan(self):
        rng = random.Random(97)
        queries = 0
        while queries < 10000:
            lexicon = random_lexicon(rng)
            matcher = compile_matcher(lexicon)
            for _ in range(250):
                token = random_word(rng) + ("" if rng.random() < 0.7 else random_word(rng))
                self.assertEqual(match_token(matcher, token), scan_token(lexicon, token))
                window = [random_word(rng) for _ in range(rng.randint(0, 3))]
                self.assertEqual(match_phrases(matcher, window), scan_phrases(lexicon, window))
                queries += 2

    def test_large_lexicon_against_linear_scan(self):
        rng = random.Random(2024)
        alphabet = "abcdefgh"
        categories = tuple(Category(cid, f"c{cid}") for cid in range(1, 21))
        entries, seen = [], set()
        while len(entries) < 10000:
            word = "".join(rng.choice(alphabet) for _ in range(rng.randint(2, 7)))
            raw = word + "*" if rng.random() < 0.3 else word
            if raw in seen:
                continue
            seen.add(raw)
            ids = frozenset(rng.sample(range(1, 21), rng.randint(1, 3)))
            entries.append(LexiconEntry(Pattern.parse(raw), ids))
        lexicon = Lexicon(categories, tuple(entries))
        matcher = compile_matcher(lexicon)
        for _ in range(1000):
            token = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 9)))
            self.assertEqual(match_token(matcher, token), scan_token(lexicon, token))

    def test_empty_lexicon_matches_nothing(self):
        matcher = compile_matcher(Lexicon((Category(1, "cog"),), ()))
        for token in ("", "a", "know", "knowledge"):
            self.assertEqual(match_token(matcher, token), set())
        self.assertEqual(match_phrases(matcher, ["in", "spite", "of"]), [])

    def test_adding_entries_never_removes_categories(self):
        rng = random.Random(5)
        for _ in range(50):
            lexicon = random_lexicon(rng)
            extra = [e for e in random_lexicon(rng).entries
                     if e.pattern.field not in {x.pattern.field for x in lexicon.entries}]
            grown = Lexicon(lexicon.categories, lexicon.entries + tuple(extra))
            before, after = compile_matcher(lexicon), compile_matcher(grown)
            for _ in range(40):
                token = random_word(rng) + random_word(rng)
                self.assertLessEqual(match_token(before, token), match_token(after, token))
                window = [random_word(rng) for _ in range(3)]
                old_ids = set().union(*[ids for _, ids in match_phrases(before, window)])
                new_ids = set().union(*[ids for _, ids in match_phrases(after, window)])
                self.assertLessEqual(old_ids, new_ids)


if __name__ == '__main__':
    unittest.main()
