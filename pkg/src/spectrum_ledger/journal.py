"""Append-only event journal (JSON Lines).

One JSON object per line with fields {seq, timestamp, event, args}. The first
line is a seq-0 "Genesis" header carrying the genesis config as strings; real
events run seq 1..N with no gaps. Each command's batch is persisted with a
single write(2) followed by fsync before the command is acknowledged, so a
killed process can never leave a half-written batch behind.

Reading is strict: a truncated last line, a seq gap, an unknown field shape,
or a header that disagrees with the active config all refuse the journal.
"""

from __future__ import annotations

import os
from pathlib import Path

from .errors import CorruptJournal, GenesisMismatch, PersistenceFailure
from .ledger import EVENT_GENESIS, Ledger
from .model import EventRecord, GenesisConfig


def genesis_header(genesis: GenesisConfig) -> EventRecord:
    return EventRecord(
        seq=0,
        timestamp=genesis.genesis_time,
        event=EVENT_GENESIS,
        args=genesis.as_args(),
    )


def read_journal(path: str | Path) -> tuple[GenesisConfig | None, list[EventRecord]]:
    """Parse and validate a journal file.

    Returns (header config or None, event records). Missing and empty files
    both read as (None, []).
    """
    path = Path(path)
    if not path.exists():
        return None, []
    data = path.read_bytes()
    if not data:
        return None, []
    if not data.endswith(b"\n"):
        raise CorruptJournal("journal ends with a truncated line")
    header: GenesisConfig | None = None
    records: list[EventRecord] = []
    expected_seq = 1
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        record = EventRecord.from_json_line(raw)
        if lineno == 1 and record.seq == 0:
            if record.event != EVENT_GENESIS:
                raise CorruptJournal(f"seq-0 line must be a {EVENT_GENESIS} header")
            try:
                header = GenesisConfig.from_args(record.args)
            except (KeyError, ValueError) as exc:
                raise CorruptJournal(f"bad Genesis header: {exc}") from exc
            continue
        if record.event == EVENT_GENESIS:
            raise CorruptJournal(f"unexpected Genesis record at line {lineno}")
        if record.seq != expected_seq:
            raise CorruptJournal(
                f"seq gap at line {lineno}: expected {expected_seq}, found {record.seq}"
            )
        expected_seq += 1
        records.append(record)
    return header, records


def replay_journal(path: str | Path, genesis: GenesisConfig | None = None) -> Ledger:
    """Offline replay: fold a journal into a fresh ledger.

    The genesis config is taken from the journal header when present; a
    caller-supplied config must agree with the header.
    """
    header, records = read_journal(path)
    if header is None and genesis is None:
        raise GenesisMismatch("journal has no Genesis header and no config was supplied")
    if header is not None and genesis is not None and header != genesis:
        raise GenesisMismatch("journal Genesis header does not match the supplied config")
    return Ledger.replay(header or genesis, records)


class JournalWriter:
    """Durable appender. Not thread-safe; callers hold the command lock."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
        except OSError as exc:
            raise PersistenceFailure(f"cannot open journal {self.path}: {exc}") from exc

    def write_genesis(self, genesis: GenesisConfig) -> None:
        self._write_lines([genesis_header(genesis)])

    def append(self, records: list[EventRecord]) -> None:
        self._write_lines(records)

    def _write_lines(self, records: list[EventRecord]) -> None:
        payload = "".join(record.to_json_line() + "\n" for record in records).encode("utf-8")
        try:
            written = os.write(self._fd, payload)
            if written != len(payload):
                raise OSError(f"short write: {written} of {len(payload)} bytes")
            os.fsync(self._fd)
        except OSError as exc:
            raise PersistenceFailure(f"journal append failed: {exc}") from exc

    def close(self) -> None:
        try:
            os.close(self._fd)
        except OSError:
            pass
