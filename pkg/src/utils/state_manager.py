"""
Pipeline stage-state store.

Each stage records the fingerprint of its inputs and the hashes of the files it
wrote. A stage is up to date when both still match what is on disk.
"""
import json
import logging
from pathlib import Path

from src.utils.file_utils import atomic_write_json, sha256_file

logger = logging.getLogger(__name__)

STATE_FILE_NAME = ".pipeline_state.json"
STATE_VERSION = 1


class PipelineState:
    """JSON stage-state file with backup and recovery."""

    def __init__(self, output_dir):
        """
        Initialize the state store.

        Args:
            output_dir: Run output directory; the state file lives directly inside it
        """
        self.output_dir = Path(output_dir)
        self.state_file = self.output_dir / STATE_FILE_NAME
        self.backup_file = Path(str(self.state_file) + ".backup")
        self._stages = None

    def _load(self):
        if self._stages is not None:
            return self._stages
        for candidate in (self.state_file, self.backup_file):
            if not candidate.exists():
                continue
            try:
                with open(candidate, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                stages = loaded.get('stages', {}) if isinstance(loaded, dict) else {}
                if candidate is self.backup_file:
                    logger.warning("⚠️ Main state file unusable, recovered stage state from backup")
                self._stages = stages
                return stages
            except (OSError, ValueError) as e:
                logger.error(f"❌ Error loading stage state from {candidate.name}: {e}")
        self._stages = {}
        return self._stages

    def _save(self):
        if self.state_file.exists():
            try:
                self.backup_file.write_bytes(self.state_file.read_bytes())
            except OSError as e:
                logger.warning(f"Could not create state backup: {e}")
        atomic_write_json(self.state_file, {'version': STATE_VERSION, 'stages': self._stages})
        logger.debug(f"💾 Stage state saved ({len(self._stages)} stages)")

    def get_stage(self, stage):
        return self._load().get(stage)

    def is_up_to_date(self, stage, fingerprint):
        """
        Check whether a stage can be skipped.

        Returns:
            bool: True iff the recorded fingerprint matches and every recorded output
            exists with its recorded hash
        """
        record = self._load().get(stage)
        if not record or record.get('fingerprint') != fingerprint:
            return False
        outputs = record.get('outputs', {})
        if not outputs:
            return False
        for rel_path, digest in outputs.items():
            if sha256_file(self.output_dir / rel_path) != digest:
                logger.info(f"🔄 Stage '{stage}' is stale: {rel_path} changed or missing")
                return False
        return True

    def record_stage(self, stage, fingerprint, output_paths, counts=None):
        """Record a completed stage with its fingerprint and output hashes."""
        outputs = {}
        for path in output_paths:
            path = Path(path)
            rel_path = path.relative_to(self.output_dir).as_posix()
            outputs[rel_path] = sha256_file(path)
        self._load()[stage] = {
            'fingerprint': fingerprint,
            'outputs': dict(sorted(outputs.items())),
            'counts': counts or {},
        }
        self._save()

    def invalidate(self, stage):
        """Forget a stage so its next run cannot be skipped."""
        stages = self._load()
        if stage in stages:
            del stages[stage]
            self._save()
            logger.debug(f"🗑️ Invalidated stage state: {stage}")


__all__ = ['PipelineState', 'STATE_FILE_NAME']
