# scripts/benchmark_matcher.py
"""
Benchmark script for dictionary matching and feature extraction.
Compares the compiled trie matcher against a linear scan over every pattern.
"""
import random
import sys
import time
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import DEFAULT_COMPOSITES_PATH, DEFAULT_DICTIONARY_PATH  # noqa: E402
from src.services.corpus import read_corpus  # noqa: E402
from src.services.extractor import extract_corpus, load_composites, tokenize  # noqa: E402
from src.services.lexicon import PatternKind, load_dictionary  # noqa: E402
from src.services.matcher import compile_matcher  # noqa: E402

DEMO_CORPUS = Path(__file__).parent.parent / "data" / "demo" / "corpus.jsonl"


def linear_match(lexicon, token):
    """Reference lookup: test every single-word pattern."""
    ids = set()
    for entry in lexicon.entries:
        pattern = entry.pattern
        if pattern.kind is PatternKind.EXACT and token == pattern.text:
            ids |= entry.category_ids
        elif pattern.kind is PatternKind.STEM and token.startswith(pattern.text):
            ids |= entry.category_ids
    return ids


def load_tokens():
    tokens = []
    for record in read_corpus(DEMO_CORPUS):
        tokens.extend(tokenize(record.abstract))
    return tokens


def benchmark_token_lookup(lexicon, tokens, iterations=20):
    """Benchmark compiled versus linear token lookup."""
    print("⚡ Benchmarking Token Lookup")
    print("-" * 40)

    matcher = compile_matcher(lexicon)
    start_time = time.time()
    for _ in range(iterations):
        for token in tokens:
            matcher.match_token(token)
    compiled_time = time.time() - start_time

    start_time = time.time()
    for _ in range(iterations):
        for token in tokens:
            linear_match(lexicon, token)
    linear_time = time.time() - start_time

    lookups = iterations * len(tokens)
    print(f"Total lookups: {lookups}")
    print(f"Compiled: {compiled_time:.3f} s ({lookups / max(compiled_time, 1e-9):.0f} lookups/s)")
    print(f"Linear:   {linear_time:.3f} s ({lookups / max(linear_time, 1e-9):.0f} lookups/s)")
    print(f"Speedup: {linear_time / max(compiled_time, 1e-9):.1f}x")


def check_agreement(lexicon, tokens, samples=5000, seed=7):
    """Compiled and linear lookups must agree on every sampled token."""
    print("\n🎯 Checking Compiled/Linear Agreement")
    print("-" * 40)

    matcher = compile_matcher(lexicon)
    rng = random.Random(seed)
    vocabulary = sorted(set(tokens))
    mismatches = 0
    for _ in range(samples):
        token = rng.choice(vocabulary)
        if set(matcher.match_token(token)) != linear_match(lexicon, token):
            mismatches += 1
    print(f"Sampled tokens: {samples}, mismatches: {mismatches}")
    return mismatches


def benchmark_extraction(lexicon, iterations=10):
    """Benchmark whole-corpus feature extraction."""
    print("\n⚡ Benchmarking Feature Extraction")
    print("-" * 40)

    matcher = compile_matcher(lexicon)
    composites = load_composites(DEFAULT_COMPOSITES_PATH)
    documents = [(r.id, "human", r.abstract) for r in read_corpus(DEMO_CORPUS)]

    start_time = time.time()
    for _ in range(iterations):
        extract_corpus(matcher, composites, documents)
    total_time = time.time() - start_time

    extracted = iterations * len(documents)
    print(f"Documents extracted: {extracted}")
    print(f"Average per document: {total_time / extracted * 1000:.2f} ms")


def main():
    """Main benchmark function."""
    print("🏁 Dictionary Matcher Benchmark")
    print("=" * 50)

    lexicon = load_dictionary(DEFAULT_DICTIONARY_PATH)
    tokens = load_tokens()
    benchmark_token_lookup(lexicon, tokens)
    mismatches = check_agreement(lexicon, tokens)
    benchmark_extraction(lexicon)

    print("\n✅ Benchmark complete!" if not mismatches else "\n❌ Matcher disagrees with linear scan")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
