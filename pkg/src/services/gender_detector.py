"""
Author gender inference from first names and publication-level labels.
"""
import logging
from collections import Counter
from enum import Enum
from pathlib import Path

import pandas as pd

from src.utils.errors import InputError

logger = logging.getLogger(__name__)


class GenderLabel(str, Enum):
    FEMALE = "Female"
    MALE = "Male"
    MIXED = "MixedGender"
    UNKNOWN = "Unknown"


AUTHOR_LABELS = (GenderLabel.FEMALE, GenderLabel.MALE, GenderLabel.UNKNOWN)


_APOSTROPHES = str.maketrans({"\u2019": "'", "\u2018": "'"})


def strip_non_alpha(text):
    """Letters plus internal hyphens and apostrophes: '(D\u2019Arcy)' -> "D'Arcy"."""
    kept = ''.join(ch for ch in text.translate(_APOSTROPHES) if ch.isalpha() or ch in "-'")
    return kept.strip("-'")


def _whole_count(value, name):
    if isinstance(value, bool):
        raise ValueError(f"count for name '{name}' must be a whole number: {value!r}")
    number = float(value)
    if not number.is_integer():
        raise ValueError(f"count for name '{name}' must be a whole number: {value!r}")
    return int(number)


def first_name(full_name):
    """
    Lowercased first name of an author.

    'Lastname, Firstname' puts the given name after the comma; otherwise the
    first whitespace token is used.
    """
    if not full_name:
        return ""
    name = full_name.split(',', 1)[1] if ',' in full_name else full_name
    tokens = name.split()
    if not tokens:
        return ""
    return strip_non_alpha(tokens[0]).lower()


class NameLexicon:
    """Map of lowercase first name -> (female_count, male_count)."""

    def __init__(self, counts=None):
        self._counts = {}
        for name, (female, male) in (counts or {}).items():
            self.add(name, female, male)

    def add(self, name, female_count, male_count):
        female_count, male_count = _whole_count(female_count, name), _whole_count(male_count, name)
        if female_count < 0 or male_count < 0:
            raise ValueError(f"negative count for name '{name}'")
        if female_count + male_count == 0:
            raise ValueError(f"name '{name}' needs at least one positive count")
        self._counts[name.strip().translate(_APOSTROPHES).lower()] = (female_count, male_count)

    def get(self, name):
        return self._counts.get(name)

    def __contains__(self, name):
        return name in self._counts

    def __len__(self):
        return len(self._counts)

    def items(self):
        return self._counts.items()

    def swapped(self):
        """Lexicon with female and male counts exchanged for every name."""
        return NameLexicon({name: (male, female) for name, (female, male) in self._counts.items()})

    @classmethod
    def load(cls, path):
        """Read a CSV with header name,female_count,male_count."""
        path = Path(path)
        try:
            frame = pd.read_csv(path, dtype={"name": str}, keep_default_na=False)
        except (OSError, ValueError) as e:
            raise InputError(f"Cannot read name lexicon {path}: {e}") from e
        expected = {"name", "female_count", "male_count"}
        if not expected.issubset(frame.columns):
            raise InputError(f"Name lexicon {path.name} needs columns name,female_count,male_count")
        lexicon = cls()
        for line_number, row in enumerate(frame.to_dict("records"), start=2):
            try:
                lexicon.add(row["name"], row["female_count"], row["male_count"])
            except (TypeError, ValueError) as e:
                raise InputError(f"Name lexicon {path.name} line {line_number}: {e}") from None
        logger.debug(f"👥 Loaded name lexicon with {len(lexicon)} names")
        return lexicon


def _check_threshold(threshold):
    if not 0.5 < threshold <= 1:
        raise ValueError(f"threshold must be in (0.5, 1], got {threshold}")


def infer_name_gender(name, lexicon, threshold=0.9):
    """
    Gender of one author from the first-name counts.

    Returns:
        GenderLabel: Female/Male when that share reaches threshold, else Unknown
    """
    _check_threshold(threshold)
    counts = lexicon.get(first_name(name))
    if counts is None:
        return GenderLabel.UNKNOWN
    female, male = counts
    total = female + male
    if female / total >= threshold:
        return GenderLabel.FEMALE
    if male / total >= threshold:
        return GenderLabel.MALE
    return GenderLabel.UNKNOWN


def classify_publication(author_genders):
    """Publication label from its authors' labels."""
    if not author_genders:
        raise ValueError("a publication needs at least one author")
    resolved = {GenderLabel(g) for g in author_genders} - {GenderLabel.UNKNOWN}
    if GenderLabel.MIXED in resolved:
        raise ValueError("MixedGender is a publication label, not an author label")
    if resolved == {GenderLabel.FEMALE}:
        return GenderLabel.FEMALE
    if resolved == {GenderLabel.MALE}:
        return GenderLabel.MALE
    if resolved:
        return GenderLabel.MIXED
    return GenderLabel.UNKNOWN


def label_record(authors, lexicon, threshold=0.9):
    """Publication label for a list of author names; no authors means Unknown."""
    if not authors:
        return GenderLabel.UNKNOWN
    return classify_publication([infer_name_gender(a, lexicon, threshold) for a in authors])


def summarize_gender_distribution(labels):
    """
    Count publications per label.

    Args:
        labels: iterable of GenderLabel values, or records with a 'gender' attribute

    Returns:
        dict: label value -> count, every label present
    """
    counts = Counter()
    for item in labels:
        label = getattr(item, "gender", item)
        counts[GenderLabel(label)] += 1
    return {label.value: counts.get(label, 0) for label in GenderLabel}


__all__ = [
    'GenderLabel', 'NameLexicon', 'first_name', 'infer_name_gender',
    'classify_publication', 'label_record', 'summarize_gender_distribution'
]
