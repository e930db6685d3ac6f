"""Run manifest: what ran, on which input, and what it wrote.

The manifest carries wall-clock timings, so unlike every other artifact its bytes differ
between otherwise identical runs.
"""
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional
import hashlib
import json
import logging

from data.defaults import TOOL_VERSION
from utils.checkpoint import atomic_write_text

logger = logging.getLogger(__name__)

_CHUNK = 1 << 20


def fingerprint(path) -> Optional[str]:
    """sha256 of a file, or of every file in a directory in name order (names included)."""
    if path is None:
        return None
    target = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in target.iterdir() if p.is_file()) if target.is_dir() else [target]
    for file in files:
        if target.is_dir():
            digest.update(file.name.encode('utf-8') + b'\0')
        with open(file, 'rb') as stream:
            for chunk in iter(lambda: stream.read(_CHUNK), b''):
                digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: Dict
    input_path: Optional[str] = None
    input_fingerprint: Optional[str] = None
    artifacts: Dict[str, str] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    version: str = TOOL_VERSION

    @classmethod
    def for_input(cls, command: str, config: Dict, input_path=None) -> 'RunManifest':
        return cls(command, config, None if input_path is None else str(input_path), fingerprint(input_path))

    def add_artifact(self, name: str, path):
        self.artifacts[name] = str(path)

    def missing_artifacts(self):
        return [path for path in self.artifacts.values() if not Path(path).exists()]

    def to_dict(self) -> Dict:
        return {
            'command': self.command,
            'version': self.version,
            'started_at': self.started_at,
            'input': {'path': self.input_path, 'sha256': self.input_fingerprint},
            'config': self.config,
            'artifacts': self.artifacts,
            'timings': self.timings,
        }


def write_manifest(manifest: RunManifest, path):
    missing = manifest.missing_artifacts()
    if missing:
        raise FileNotFoundError(f"manifest references artifacts that were not written: {', '.join(missing)}")
    manifest.add_artifact('manifest', path)
    atomic_write_text(path, json.dumps(manifest.to_dict(), indent=2, allow_nan=True))
    logger.info(f"✅ Manifest written to {path}")
