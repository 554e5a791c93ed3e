"""State snapshots: a cached canonical state view plus its hash and seq.

Snapshots only speed up restarts; the journal stays the source of truth. A
snapshot that cannot be read or fails its own hash check is simply ignored.
Writes go through write-temp-then-rename so readers never observe a partial
file.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from .errors import PersistenceFailure
from .ledger import Ledger


class SnapshotUnusable(Exception):
    """Snapshot missing, unreadable, or failing self-verification."""


def write_snapshot(path: str | Path, ledger: Ledger) -> None:
    path = Path(path)
    payload = {
        "seq": ledger.last_seq,
        "state_hash": ledger.state_hash(),
        "state": ledger.canonical_state(),
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise PersistenceFailure(f"snapshot write failed: {exc}") from exc


def load_snapshot(path: str | Path) -> dict:
    """Read and self-verify a snapshot; raises SnapshotUnusable otherwise."""
    path = Path(path)
    if not path.exists():
        raise SnapshotUnusable(f"no snapshot at {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        seq = payload["seq"]
        state_hash = payload["state_hash"]
        state = payload["state"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SnapshotUnusable(f"unreadable snapshot {path}: {exc}") from exc
    if not isinstance(seq, int) or seq < 0 or not isinstance(state, dict):
        raise SnapshotUnusable(f"malformed snapshot {path}")
    blob = json.dumps(state, sort_keys=True, separators=(",", ":"))
    if hashlib.sha256(blob.encode("utf-8")).hexdigest() != state_hash:
        raise SnapshotUnusable(f"snapshot {path} fails its hash check")
    return payload
