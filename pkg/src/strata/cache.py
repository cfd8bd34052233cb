"""On-disk cache for CLI results.

Entries are keyed by a digest of (package version, subcommand, canonical
input payload), so stale entries from other versions are never read.  Writes
go through a temp file and an atomic replace; a cache hit returns the stored
bytes unchanged, which keeps cached and uncached runs byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

from . import __version__


def cache_key(operation, payload):
    blob = json.dumps(
        {"version": __version__, "op": operation, "payload": payload},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResultCache:
    def __init__(self, directory):
        self.directory = directory

    def _path(self, key):
        return os.path.join(self.directory, key + ".json")

    def get(self, key):
        try:
            with open(self._path(key), "rb") as fh:
                return fh.read()
        except OSError:
            return None

    def put(self, key, data):
        os.makedirs(self.directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, self._path(key))
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
