"""
LIWC-style dictionary model: categories, patterns and the percent-delimited file format.

File layout:

    %
    <id>\t<name>
    ...
    %
    <pattern>\t<id>[\t<id>...]

Stems end with '*'. Phrases hold 2-3 space-separated tokens, each optionally a stem.
Lines starting with '#' and blank lines are ignored. Whitespace-separated legacy lines
(no TAB) are accepted as well: trailing integer fields are the category ids.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from src.utils.errors import DictionaryParseError, InputError

logger = logging.getLogger(__name__)

MAX_PHRASE_TOKENS = 3
_ID_RE = re.compile(r'^\d+$')


class PatternKind(str, Enum):
    EXACT = "exact"
    STEM = "stem"
    PHRASE = "phrase"


@dataclass(frozen=True)
class Pattern:
    """One dictionary pattern. Stem text excludes the trailing asterisk."""

    kind: PatternKind
    text: str

    def __post_init__(self):
        _validate_pattern(self.kind, self.text)

    @classmethod
    def parse(cls, raw):
        """Build a pattern from its dictionary field, e.g. 'know*' or 'in spite* of'."""
        field_text = raw.strip().lower()
        if not field_text:
            raise ValueError("empty pattern")
        if ' ' in field_text:
            return cls(PatternKind.PHRASE, field_text)
        if field_text.endswith('*'):
            return cls(PatternKind.STEM, field_text[:-1])
        return cls(PatternKind.EXACT, field_text)

    @property
    def field(self):
        """The pattern as written in a dictionary file."""
        if self.kind is PatternKind.STEM:
            return f"{self.text}*"
        return self.text

    @property
    def phrase_tokens(self):
        """(text, is_stem) per token; a single pair for Exact/Stem patterns."""
        if self.kind is PatternKind.EXACT:
            return ((self.text, False),)
        if self.kind is PatternKind.STEM:
            return ((self.text, True),)
        return tuple(
            (tok[:-1], True) if tok.endswith('*') else (tok, False)
            for tok in self.text.split(' ')
        )

    @property
    def length(self):
        return len(self.phrase_tokens)


def _validate_token(token, allow_stem):
    if not token:
        raise ValueError("empty token")
    if any(ch.isspace() for ch in token):
        raise ValueError(f"whitespace inside token '{token}'")
    star = token.find('*')
    if star == -1:
        return
    if not allow_stem or star != len(token) - 1:
        raise ValueError(f"wildcard only allowed as the final character: '{token}'")
    if len(token) == 1:
        raise ValueError("stem must have at least one character before '*'")


def _validate_pattern(kind, text):
    if not text:
        raise ValueError("pattern text must be non-empty")
    if text != text.lower():
        raise ValueError(f"pattern text must be lowercase: '{text}'")
    if kind is PatternKind.EXACT:
        _validate_token(text, allow_stem=False)
    elif kind is PatternKind.STEM:
        _validate_token(text, allow_stem=False)
    else:
        tokens = text.split(' ')
        if len(tokens) not in (2, MAX_PHRASE_TOKENS):
            raise ValueError(f"phrase must have 2 or 3 tokens: '{text}'")
        for token in tokens:
            _validate_token(token, allow_stem=True)


@dataclass(frozen=True)
class Category:
    category_id: int
    name: str


@dataclass(frozen=True)
class LexiconEntry:
    pattern: Pattern
    category_ids: frozenset


@dataclass(frozen=True)
class Lexicon:
    """Parsed dictionary: ordered category table plus ordered entries."""

    categories: tuple = ()
    entries: tuple = ()
    _by_id: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        by_id = {}
        names = set()
        for category in self.categories:
            if category.category_id <= 0:
                raise ValueError(f"category id must be positive: {category.category_id}")
            if category.category_id in by_id:
                raise ValueError(f"duplicate category id {category.category_id}")
            if category.name in names:
                raise ValueError(f"duplicate category name '{category.name}'")
            by_id[category.category_id] = category.name
            names.add(category.name)
        seen = set()
        for entry in self.entries:
            if not entry.category_ids:
                raise ValueError(f"entry '{entry.pattern.field}' has no categories")
            unknown = set(entry.category_ids) - set(by_id)
            if unknown:
                raise ValueError(f"entry '{entry.pattern.field}' references unknown ids {sorted(unknown)}")
            if entry.pattern.field in seen:
                raise ValueError(f"duplicate pattern '{entry.pattern.field}'")
            seen.add(entry.pattern.field)
        object.__setattr__(self, '_by_id', by_id)

    @property
    def category_names(self):
        return tuple(c.name for c in self.categories)

    def name_for(self, category_id):
        return self._by_id[category_id]

    def without_phrases(self):
        return Lexicon(
            self.categories,
            tuple(e for e in self.entries if e.pattern.kind is not PatternKind.PHRASE),
        )


def _split_fields(line):
    """Split a line on TABs, falling back to whitespace for legacy files."""
    if '\t' in line:
        return [part.strip() for part in line.split('\t')]
    return line.split()


def _split_entry_line(line):
    """Return (pattern_field, id_fields) for a body line."""
    if '\t' in line:
        parts = [part.strip() for part in line.split('\t')]
        return parts[0], [p for p in parts[1:] if p != '']
    parts = line.split()
    split_at = len(parts)
    while split_at > 1 and _ID_RE.match(parts[split_at - 1]):
        split_at -= 1
    return ' '.join(parts[:split_at]), parts[split_at:]


def parse_dictionary(source):
    """
    Parse dictionary text into a Lexicon.

    Raises:
        DictionaryParseError: malformed header, bad category or entry line,
            unknown category id, duplicate pattern/id/name (with line number)
    """
    categories = []
    category_ids = {}
    category_names = set()
    entries = []
    seen_patterns = {}
    section = 0  # 0 before header, 1 inside category table, 2 body

    if source.startswith('\ufeff'):
        source = source[1:]
    lines = source.split('\n')
    last_line = 0
    for line_number, raw_line in enumerate(lines, start=1):
        line = raw_line.rstrip('\r')
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        last_line = line_number

        if section == 0:
            if stripped != '%':
                raise DictionaryParseError("malformed header: expected '%' on the first line", line_number)
            section = 1
            continue

        if section == 1:
            if stripped == '%':
                section = 2
                continue
            parts = _split_fields(stripped)
            if len(parts) != 2 or not parts[1]:
                raise DictionaryParseError(f"malformed category line '{stripped}'", line_number)
            id_text, name = parts
            if not _ID_RE.match(id_text) or int(id_text) <= 0:
                raise DictionaryParseError(f"category id must be a positive integer: '{id_text}'", line_number)
            category_id = int(id_text)
            if category_id in category_ids:
                raise DictionaryParseError(f"duplicate category id {category_id}", line_number)
            if name in category_names:
                raise DictionaryParseError(f"duplicate category name '{name}'", line_number)
            category_ids[category_id] = name
            category_names.add(name)
            categories.append(Category(category_id, name))
            continue

        if stripped == '%':
            raise DictionaryParseError("unexpected '%' after the category table", line_number)
        pattern_field, id_fields = _split_entry_line(stripped)
        if not id_fields:
            raise DictionaryParseError(f"entry '{pattern_field}' has no category ids", line_number)
        try:
            pattern = Pattern.parse(pattern_field)
        except ValueError as e:
            raise DictionaryParseError(f"invalid pattern '{pattern_field}': {e}", line_number) from None
        ids = []
        for id_text in id_fields:
            if not _ID_RE.match(id_text):
                raise DictionaryParseError(f"category id must be an integer: '{id_text}'", line_number)
            category_id = int(id_text)
            if category_id not in category_ids:
                raise DictionaryParseError(f"unknown category id {category_id}", line_number)
            if category_id in ids:
                raise DictionaryParseError(f"category id {category_id} repeated in entry", line_number)
            ids.append(category_id)
        if pattern.field in seen_patterns:
            raise DictionaryParseError(
                f"duplicate pattern '{pattern.field}' (first seen on line {seen_patterns[pattern.field]})",
                line_number,
            )
        seen_patterns[pattern.field] = line_number
        entries.append(LexiconEntry(pattern, frozenset(ids)))

    if section == 0:
        raise DictionaryParseError("malformed header: dictionary is empty", max(last_line, 1))
    if section == 1:
        raise DictionaryParseError("malformed header: missing closing '%'", max(last_line, 1))

    lexicon = Lexicon(tuple(categories), tuple(entries))
    logger.debug(f"📖 Parsed dictionary: {len(categories)} categories, {len(entries)} entries")
    return lexicon


def serialize_dictionary(lexicon):
    """Render a Lexicon in the dictionary file format (LF newlines, ids ascending)."""
    lines = ['%']
    lines.extend(f"{c.category_id}\t{c.name}" for c in lexicon.categories)
    lines.append('%')
    for entry in lexicon.entries:
        ids = '\t'.join(str(cid) for cid in sorted(entry.category_ids))
        lines.append(f"{entry.pattern.field}\t{ids}")
    return '\n'.join(lines) + '\n'


def load_dictionary(path):
    """Read and parse a dictionary file."""
    path = Path(path)
    try:
        source = path.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot read dictionary {path}: {e}") from e
    try:
        return parse_dictionary(source)
    except DictionaryParseError as e:
        raise DictionaryParseError(e.detail, e.line_number, source=path.name) from None


__all__ = [
    'PatternKind', 'Pattern', 'Category', 'LexiconEntry', 'Lexicon',
    'parse_dictionary', 'serialize_dictionary', 'load_dictionary', 'MAX_PHRASE_TOKENS'
]
