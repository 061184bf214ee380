import csv
import hashlib
import io
import json
import logging
import threading
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
from attrs import define, field

logger = logging.getLogger(__name__)

VERSIONED = ("symphom", "numpy", "scipy", "gudhi")


def _cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (np.integer, np.bool_)):
        return str(int(x))
    return str(x)


def _plain(x: Any) -> Any:
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"{type(x).__name__} is not JSON serializable")


def _version(package: str) -> str:
    try:
        return metadata.version(package)
    except metadata.PackageNotFoundError:
        return "unknown"


@define
class ArtifactEmitter:
    """
    The only writer of a run's output directory.

    Writes are serialized through one lock; every artifact is hashed as it is
    written and listed in the manifest.
    """

    _root: Path
    _lock: threading.Lock = field(factory=threading.Lock)
    _digests: Dict[str, str] = field(factory=dict)

    @property
    def root(self) -> Path:
        return self._root

    def _write(self, name: str, body: bytes) -> Path:
        with self._lock:
            path = self._root / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(body)
            self._digests[name] = hashlib.sha256(body).hexdigest()
        logger.info("wrote %s", path)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_cell(x) for x in row] for row in rows)
        return self._write(name, buffer.getvalue().encode())

    def write_json(self, name: str, record: Any) -> Path:
        body = json.dumps(record, indent=2, sort_keys=True, default=_plain) + "\n"
        return self._write(name, body.encode())

    @property
    def artifacts(self) -> List[str]:
        with self._lock:
            return sorted(self._digests)

    def write_manifest(self, runtimes: Dict[str, float], config: Dict[str, Any]) -> Path:
        with self._lock:
            digests = dict(self._digests)
        manifest = {
            "created": datetime.now(timezone.utc).isoformat(),
            "versions": {package: _version(package) for package in VERSIONED},
            "artifacts": {name: {"sha256": digest} for name, digest in sorted(digests.items())},
            "runtimes": runtimes,
            "config": config,
        }
        return self._write("manifest.json", (json.dumps(manifest, indent=2, default=_plain) + "\n").encode())

    @classmethod
    def init(cls, root: Path) -> "ArtifactEmitter":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        return cls(root)
