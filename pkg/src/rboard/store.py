"""File-backed record store and content-addressed archive blobs.

Single-node by design: many concurrent readers, serialized writers. Records
are whole JSON documents swapped in with an atomic rename, so a reader (or a
restart after a crash mid-write) only ever observes the old or the new
complete value.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from contextlib import contextmanager
from pathlib import Path

from .errors import ImmutableRecord, NotFound
from .registry import sha256_hex

KINDS = ("dataset", "submission", "run", "result")
TERMINAL_RUN_STATUSES = frozenset({"succeeded", "failed", "timeout", "output_invalid"})
_KEY_RE = re.compile(r"^[a-z0-9-]{1,80}$")


class Store:
    def __init__(self, root: Path):
        self.records_dir = root / "store"
        self.archives_dir = root / "archives"
        for kind in KINDS:
            (self.records_dir / kind).mkdir(parents=True, exist_ok=True)
        self.archives_dir.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.RLock()

    def _path(self, kind: str, key: str) -> Path:
        if kind not in KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        if not _KEY_RE.match(key):
            raise ValueError(f"invalid record key {key!r}")
        return self.records_dir / kind / f"{key}.json"

    @contextmanager
    def transaction(self):
        """Serialize a multi-record update (e.g. run + submission state)."""
        with self._write_lock:
            yield

    def put(self, kind: str, key: str, value: dict) -> None:
        path = self._path(kind, key)
        with self._write_lock:
            if kind == "run" and path.is_file():
                current = self._read(path)
                if current.get("status") in TERMINAL_RUN_STATUSES:
                    raise ImmutableRecord(
                        f"run {key!r} is terminal ({current['status']}) and immutable"
                    )
            payload = json.dumps(value, sort_keys=True).encode("utf-8")
            fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(payload)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise

    @staticmethod
    def _read(path: Path) -> dict:
        return json.loads(path.read_text(encoding="utf-8"))

    def get(self, kind: str, key: str) -> dict:
        path = self._path(kind, key)
        if not path.is_file():
            raise NotFound(f"{kind} {key!r} not found")
        return self._read(path)

    def exists(self, kind: str, key: str) -> bool:
        return self._path(kind, key).is_file()

    def list(self, kind: str, where: dict | None = None) -> list[dict]:
        """All records of a kind in key order, optionally field-filtered."""
        if kind not in KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        out = []
        for path in sorted((self.records_dir / kind).glob("*.json")):
            record = self._read(path)
            if where and any(record.get(k) != v for k, v in where.items()):
                continue
            out.append(record)
        return out

    # -- archive blobs (content-addressed, deduplicating) --

    def put_archive(self, data: bytes) -> str:
        checksum = sha256_hex(data)
        path = self.archives_dir / f"{checksum}.zip"
        with self._write_lock:
            if not path.is_file():
                fd, tmp_name = tempfile.mkstemp(dir=self.archives_dir, prefix=".tmp-")
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp_name, path)
        return checksum

    def get_archive(self, checksum: str) -> bytes:
        path = self.archives_dir / f"{checksum}.zip"
        if not path.is_file():
            raise NotFound(f"archive {checksum} not found")
        data = path.read_bytes()
        if sha256_hex(data) != checksum:
            raise NotFound(f"archive {checksum} failed integrity check")
        return data
