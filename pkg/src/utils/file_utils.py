"""
File helpers shared by every stage: atomic writes, content hashing, JSONL.
"""
import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

from src.utils.errors import CorpusFormatError

logger = logging.getLogger(__name__)


def atomic_write_text(path, text):
    """Write text (UTF-8, LF) via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return path


def atomic_write_json(path, data):
    """Write JSON with sorted keys so identical data gives identical bytes."""
    text = json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    return atomic_write_text(path, text)


def read_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def sha256_bytes(data):
    return hashlib.sha256(data).hexdigest()


def sha256_text(text):
    return sha256_bytes(text.encode('utf-8'))


def sha256_file(path):
    """Content hash of a file, or None when it does not exist."""
    path = Path(path)
    if not path.exists():
        return None
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def fingerprint(payload):
    """Stable hash of any JSON-serializable payload."""
    canonical = json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(',', ':'))
    return sha256_text(canonical)


def read_jsonl(path):
    """
    Read a JSON-lines file into a list of (line_number, object) pairs.

    Raises:
        CorpusFormatError: unreadable file or a line that is not valid JSON
    """
    path = Path(path)
    rows = []
    try:
        with open(path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    rows.append((line_number, json.loads(line)))
                except json.JSONDecodeError as e:
                    raise CorpusFormatError(
                        f"{path.name} line {line_number}: invalid JSON ({e.msg})"
                    ) from None
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusFormatError(f"Cannot read {path}: {e}") from e
    return rows


def write_jsonl(path, objects):
    lines = [json.dumps(obj, ensure_ascii=False, sort_keys=True) for obj in objects]
    text = "\n".join(lines) + ("\n" if lines else "")
    return atomic_write_text(path, text)
