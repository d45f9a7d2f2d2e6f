"""
Rewrite response cache: one JSON file per request fingerprint.
"""
import json
import logging
from pathlib import Path

from src.utils.file_utils import atomic_write_json
from src.utils.time_utils import utc_timestamp

logger = logging.getLogger(__name__)


class ResponseCache:
    """Directory-backed cache keyed by request fingerprint."""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        self.stats = {'hits': 0, 'misses': 0, 'writes': 0, 'corrupt': 0}

    def _path(self, fingerprint):
        # <cache_dir>/<fp[:2]>/<fp>.json
        return self.cache_dir / fingerprint[:2] / f"{fingerprint}.json"

    def get(self, fingerprint):
        """
        Look up a cached record.

        Returns:
            dict or None: The stored record; None on a miss or an unreadable file
        """
        path = self._path(fingerprint)
        if not path.exists():
            self.stats['misses'] += 1
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                record = json.load(f)
            if not isinstance(record, dict) or record.get('fingerprint') != fingerprint:
                raise ValueError("fingerprint mismatch")
        except (OSError, ValueError) as e:
            self.stats['corrupt'] += 1
            self.stats['misses'] += 1
            logger.warning(f"⚠️ Corrupt cache entry {path.name} treated as miss: {e}")
            return None
        self.stats['hits'] += 1
        return record

    def put(self, fingerprint, record):
        """Store a record atomically; adds the fingerprint and a created timestamp."""
        stored = dict(record)
        stored['fingerprint'] = fingerprint
        stored.setdefault('created', utc_timestamp())
        atomic_write_json(self._path(fingerprint), stored)
        self.stats['writes'] += 1
        return stored

    def __contains__(self, fingerprint):
        return self._path(fingerprint).exists()

    def __len__(self):
        if not self.cache_dir.exists():
            return 0
        return sum(1 for _ in self.cache_dir.glob('*/*.json'))


__all__ = ['ResponseCache']
