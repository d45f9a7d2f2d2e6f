"""
Corpus records and their JSON-lines / CSV formats.

JSONL field names: id, title, abstract, authors (list of full names), and an
optional gender written by the gender stage.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from src.services.gender_detector import GenderLabel
from src.utils.errors import CorpusFormatError
from src.utils.file_utils import write_jsonl

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "title", "abstract", "authors")
AUTHOR_SEPARATOR = ";"


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    title: str
    abstract: str
    authors: tuple
    gender: GenderLabel = None

    def with_gender(self, gender):
        return CorpusRecord(self.id, self.title, self.abstract, self.authors, GenderLabel(gender))

    def to_json(self):
        data = {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
        }
        if self.gender is not None:
            data["gender"] = self.gender.value
        return data

    @classmethod
    def from_json(cls, data, line_number=None):
        where = f"line {line_number}: " if line_number is not None else ""
        if not isinstance(data, dict):
            raise CorpusFormatError(f"{where}record must be a JSON object")
        missing = [f for f in REQUIRED_FIELDS if f not in data]
        if missing:
            raise CorpusFormatError(f"{where}missing field(s) {', '.join(missing)}")
        authors = data["authors"]
        if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
            raise CorpusFormatError(f"{where}'authors' must be a list of strings")
        if not isinstance(data["abstract"], str):
            raise CorpusFormatError(f"{where}'abstract' must be a string")
        gender = data.get("gender")
        try:
            gender = GenderLabel(gender) if gender is not None else None
        except ValueError:
            raise CorpusFormatError(f"{where}unknown gender label '{gender}'") from None
        return cls(
            id=str(data["id"]),
            title=str(data["title"] or ""),
            abstract=data["abstract"],
            authors=tuple(authors),
            gender=gender,
        )


def _check_unique(records, path):
    seen = set()
    for record in records:
        if record.id in seen:
            raise CorpusFormatError(f"{Path(path).name}: duplicate record id '{record.id}'")
        seen.add(record.id)


def read_corpus(path):
    """
    Read a JSON-lines corpus.

    Raises:
        CorpusFormatError: unreadable file, invalid JSON, missing fields or duplicate ids
    """
    path = Path(path)
    records = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as e:
                    raise CorpusFormatError(f"{path.name} line {line_number}: invalid JSON ({e.msg})") from None
                records.append(CorpusRecord.from_json(data, line_number))
    except OSError as e:
        raise CorpusFormatError(f"Cannot read corpus {path}: {e}") from e
    _check_unique(records, path)
    logger.debug(f"📚 Read {len(records)} records from {path.name}")
    return records


def write_corpus(path, records):
    return write_jsonl(path, [r.to_json() for r in records])


def import_csv(path):
    """
    Convert a CSV with columns id,title,abstract,authors into corpus records.
    Authors are separated by ';'.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, ValueError) as e:
        raise CorpusFormatError(f"Cannot read CSV {path}: {e}") from e
    missing = [c for c in REQUIRED_FIELDS if c not in frame.columns]
    if missing:
        raise CorpusFormatError(f"{path.name}: missing column(s) {', '.join(missing)}")
    records = []
    for row in frame.to_dict("records"):
        authors = tuple(a.strip() for a in row["authors"].split(AUTHOR_SEPARATOR) if a.strip())
        records.append(CorpusRecord(row["id"].strip(), row["title"], row["abstract"], authors))
    _check_unique(records, path)
    logger.info(f"📥 Imported {len(records)} records from {path.name}")
    return records


__all__ = ['CorpusRecord', 'read_corpus', 'write_corpus', 'import_csv', 'REQUIRED_FIELDS']
