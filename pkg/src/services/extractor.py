"""
Feature extraction: tokenization, per-category percentages and summary composites.

Every output is laid out in FEATURE_SCHEMA order.
"""
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import pandas as pd
import yaml

from src.utils.errors import CompositeError, ConfigError, InputError
from src.utils.file_utils import atomic_write_text

logger = logging.getLogger(__name__)

FEATURE_SCHEMA = (
    "Segment", "WC", "Analytic", "Clout", "Tone",
    "affiliation", "achieve", "power",
    "insight", "cause", "discrep", "tentat", "certitude", "differ",
    "tone_pos", "tone_neg", "emotion", "emo_pos", "emo_neg", "emo_anx", "emo_anger", "emo_sad",
    "prosocial", "polite", "conflict", "moral", "comm",
    "politic", "ethnicity", "tech",
    "reward", "risk", "curiosity", "allure",
)

COMPOSITE_FEATURES = ("Analytic", "Clout", "Tone")
COMPUTED_FEATURES = ("Segment", "WC") + COMPOSITE_FEATURES
DICTIONARY_FEATURES = tuple(f for f in FEATURE_SCHEMA if f not in COMPUTED_FEATURES)

FEATURE_GROUPS = {
    "lexical": ("Segment", "WC", "Analytic", "Clout", "Tone"),
    "drives": ("affiliation", "achieve", "power"),
    "cognition": ("insight", "cause", "discrep", "tentat", "certitude", "differ"),
    "affect": ("tone_pos", "tone_neg", "emotion", "emo_pos", "emo_neg", "emo_anx", "emo_anger", "emo_sad"),
    "social": ("prosocial", "polite", "conflict", "moral", "comm"),
    "culture": ("politic", "ethnicity", "tech"),
    "motives": ("reward", "risk", "curiosity", "allure"),
}

KEY_COLUMNS = ("record_id", "variant")
DEGENERATE_COLUMN = "degenerate"

_TOKEN_RE = re.compile(r"[^\W_]+(?:['-][^\W_]+)*")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'"})


def tokenize(text):
    """Maximal alphanumeric runs joined by internal apostrophes or hyphens, lowercased."""
    if not text:
        return []
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text.translate(_APOSTROPHES))]


# ============================================================================
# COMPOSITES
# ============================================================================

@dataclass(frozen=True)
class CompositeDef:
    name: str
    intercept: float
    terms: tuple
    clamp: tuple = (0.0, 100.0)

    def evaluate(self, raw):
        value = self.intercept
        for category, weight in self.terms:
            if category not in raw:
                raise CompositeError(self.name, category)
            value += weight * raw[category]
        low, high = self.clamp
        return min(max(value, low), high)


def compute_composites(raw, defs):
    """
    Evaluate composite definitions over a category-percentage map.

    Returns:
        dict: composite name -> clamp(intercept + sum(weight * raw[category]))

    Raises:
        CompositeError: A definition references a category missing from raw
    """
    return {d.name: d.evaluate(raw) for d in defs}


def _parse_composite(raw, index):
    where = f"composites[{index}]"
    if not isinstance(raw, dict) or not raw.get("name"):
        raise ConfigError(f"{where}: each composite needs a 'name'")
    name = raw["name"]
    try:
        intercept = float(raw.get("intercept", 0.0))
    except (TypeError, ValueError):
        raise ConfigError(f"{where} ({name}): 'intercept' must be a number") from None
    terms = raw.get("terms") or {}
    if isinstance(terms, dict):
        items = list(terms.items())
    elif isinstance(terms, list):
        items = []
        for term in terms:
            if not isinstance(term, dict) or "category" not in term:
                raise ConfigError(f"{where} ({name}): list terms need 'category' and 'weight'")
            items.append((term["category"], term.get("weight", 1.0)))
    else:
        raise ConfigError(f"{where} ({name}): 'terms' must be a mapping or a list")
    parsed_terms = []
    for category, weight in items:
        try:
            parsed_terms.append((str(category), float(weight)))
        except (TypeError, ValueError):
            raise ConfigError(f"{where} ({name}): weight for '{category}' must be a number") from None
    clamp = raw.get("clamp", [0, 100])
    if not isinstance(clamp, list) or len(clamp) != 2 or float(clamp[0]) > float(clamp[1]):
        raise ConfigError(f"{where} ({name}): 'clamp' must be [low, high]")
    return CompositeDef(name, intercept, tuple(parsed_terms), (float(clamp[0]), float(clamp[1])))


def load_composites(path):
    """Read composite definitions from a YAML file with a top-level 'composites' list."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise InputError(f"Cannot read composites {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {path}: {e}") from e
    items = data.get("composites") if isinstance(data, dict) else None
    if not isinstance(items, list):
        raise ConfigError(f"{path.name}: expected a top-level 'composites' list")
    defs = [_parse_composite(item, index) for index, item in enumerate(items)]
    names = [d.name for d in defs]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path.name}: composite names must be unique")
    return defs


def validate_composites(defs, lexicon):
    """Every referenced category must exist in the dictionary."""
    available = set(lexicon.category_names)
    for d in defs:
        for category, _ in d.terms:
            if category not in available:
                raise CompositeError(d.name, category)


# ============================================================================
# EXTRACTION
# ============================================================================

@dataclass(frozen=True)
class FeatureVector:
    """34 feature values for one (record, variant) pair, aligned to FEATURE_SCHEMA."""

    record_id: str
    variant: str
    values: tuple
    degenerate: bool = False

    def __getitem__(self, feature):
        return self.values[FEATURE_SCHEMA.index(feature)]


def count_categories(matcher, tokens):
    """
    Raw per-category counts: the number of token positions where a category
    matches as a single word or as the start of a phrase.

    Returns:
        dict: category id -> count
    """
    counts = {}
    width = matcher.max_phrase_len
    for position, token in enumerate(tokens):
        ids = set(matcher.match_token(token))
        if width > 1:
            for _, phrase_ids in matcher.match_phrases(tokens[position:position + width]):
                ids.update(phrase_ids)
        for category_id in ids:
            counts[category_id] = counts.get(category_id, 0) + 1
    return counts


def extract_features(matcher, composites, text, record_id="", variant="human"):
    """
    Compute the feature vector of one document.

    Category values are 100 * count / WC. Composites come from the raw percentages
    of every dictionary category. A composite with no definition is NaN.
    A zero-word document yields zeros for every category and is flagged degenerate.
    """
    lexicon = matcher.lexicon
    tokens = tokenize(text)
    word_count = len(tokens)
    degenerate = word_count == 0

    raw = {name: 0.0 for name in lexicon.category_names}
    if not degenerate:
        for category_id, count in count_categories(matcher, tokens).items():
            raw[lexicon.name_for(category_id)] = 100.0 * count / word_count

    composite_values = compute_composites(raw, composites)
    values = []
    for feature in FEATURE_SCHEMA:
        if feature == "Segment":
            values.append(1.0)
        elif feature == "WC":
            values.append(float(word_count))
        elif feature in COMPOSITE_FEATURES:
            values.append(composite_values.get(feature, math.nan))
        else:
            values.append(raw.get(feature, 0.0))
    return FeatureVector(record_id, variant, tuple(values), degenerate)


def extract_corpus(matcher, composites, documents, workers=1):
    """
    Extract one FeatureVector per (record_id, variant, text) row, in input order.

    Args:
        workers: thread count; results are identical for any value
    """
    documents = list(documents)

    def _one(row):
        record_id, variant, text = row
        return extract_features(matcher, composites, text, record_id=record_id, variant=variant)

    if workers > 1 and len(documents) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(_one, documents))
    else:
        vectors = [_one(row) for row in documents]

    degenerate = sum(1 for v in vectors if v.degenerate)
    if degenerate:
        logger.warning(f"⚠️ {degenerate} document(s) had zero words and were flagged degenerate")
    logger.debug(f"🧮 Extracted {len(vectors)} feature vectors with {workers} worker(s)")
    return FeatureTable(vectors)


# ============================================================================
# FEATURE TABLE
# ============================================================================

class FeatureTable:
    """Ordered collection of FeatureVectors persisted as CSV."""

    def __init__(self, vectors=()):
        self.vectors = list(vectors)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __eq__(self, other):
        return isinstance(other, FeatureTable) and self.vectors == other.vectors

    @property
    def record_ids(self):
        return [v.record_id for v in self.vectors]

    def to_frame(self):
        rows = []
        for v in self.vectors:
            row = {"record_id": v.record_id, "variant": v.variant}
            row.update(zip(FEATURE_SCHEMA, v.values))
            row[DEGENERATE_COLUMN] = int(v.degenerate)
            rows.append(row)
        columns = list(KEY_COLUMNS) + list(FEATURE_SCHEMA) + [DEGENERATE_COLUMN]
        return pd.DataFrame(rows, columns=columns)

    @classmethod
    def from_frame(cls, frame):
        missing = [c for c in list(KEY_COLUMNS) + list(FEATURE_SCHEMA) if c not in frame.columns]
        if missing:
            raise InputError(f"Feature table is missing columns: {', '.join(missing)}")
        vectors = []
        for data in frame.to_dict("records"):
            values = tuple(float(data[f]) for f in FEATURE_SCHEMA)
            degenerate = bool(int(data.get(DEGENERATE_COLUMN, 0)))
            vectors.append(FeatureVector(str(data["record_id"]), str(data["variant"]), values, degenerate))
        return cls(vectors)

    def to_csv_text(self):
        return self.to_frame().to_csv(index=False, lineterminator="\n", na_rep="NaN")

    def write_csv(self, path):
        return atomic_write_text(path, self.to_csv_text())

    @classmethod
    def read_csv(cls, path):
        try:
            frame = pd.read_csv(
                path,
                dtype={"record_id": str, "variant": str},
                keep_default_na=False,
                na_values=["NaN"],
                float_precision="round_trip",
            )
        except (OSError, ValueError) as e:
            raise InputError(f"Cannot read feature table {path}: {e}") from e
        return cls.from_frame(frame)

    def column(self, feature, include_degenerate=False):
        """record_id -> value for one feature."""
        return {
            v.record_id: v[feature]
            for v in self.vectors
            if include_degenerate or not v.degenerate
        }


__all__ = [
    'FEATURE_SCHEMA', 'FEATURE_GROUPS', 'COMPOSITE_FEATURES', 'DICTIONARY_FEATURES',
    'tokenize', 'CompositeDef', 'compute_composites', 'load_composites',
    'validate_composites', 'FeatureVector', 'count_categories', 'extract_features',
    'extract_corpus', 'FeatureTable'
]
