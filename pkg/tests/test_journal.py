import json

import pytest

from spectrum_ledger.errors import CorruptJournal, GenesisMismatch, PersistenceFailure
from spectrum_ledger.journal import JournalWriter, read_journal, replay_journal
from spectrum_ledger.ledger import Ledger
from spectrum_ledger.snapshot import SnapshotUnusable, load_snapshot, write_snapshot

from constants import GENESIS_TIME, make_genesis
from flows import run_canonical_auction


@pytest.fixture
def journal_path(tmp_path):
    return tmp_path / "journal.ndjson"


@pytest.fixture
def journaled_ledger(genesis, journal_path):
    writer = JournalWriter(journal_path)
    writer.write_genesis(genesis)
    ledger = Ledger(genesis, sink=writer.append)
    yield ledger
    writer.close()


class TestRoundTrip:
    def test_header_and_records_survive(self, genesis, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        header, records = read_journal(journal_path)
        assert header == genesis
        assert records == journaled_ledger.events

    def test_replay_journal_matches_live(self, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        replayed = replay_journal(journal_path)
        assert replayed.state_hash() == journaled_ledger.state_hash()

    def test_missing_and_empty_files(self, tmp_path, genesis):
        missing = tmp_path / "missing.ndjson"
        assert read_journal(missing) == (None, [])
        empty = tmp_path / "empty.ndjson"
        empty.write_bytes(b"")
        assert read_journal(empty) == (None, [])
        # empty journal + config replays to genesis state
        assert replay_journal(empty, genesis).state_hash() == Ledger(genesis).state_hash()

    def test_args_keep_insertion_order(self, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        raw = [
            json.loads(line)
            for line in journal_path.read_text().splitlines()
        ]
        mint = next(r for r in raw if r["event"] == "NFSTMint")
        assert list(mint["args"]) == [
            "startFreq", "endFreq", "location", "leaseDuration", "NFSTID", "status",
        ]


class TestCorruption:
    def test_truncated_last_line(self, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        data = journal_path.read_bytes()
        journal_path.write_bytes(data[:-10])
        with pytest.raises(CorruptJournal):
            read_journal(journal_path)

    def test_seq_gap(self, genesis, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        lines = journal_path.read_text().splitlines()
        del lines[3]
        journal_path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptJournal):
            replay_journal(journal_path, genesis)

    def test_bad_json_line(self, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        with open(journal_path, "a") as fh:
            fh.write("{not json}\n")
        with pytest.raises(CorruptJournal):
            read_journal(journal_path)

    def test_wrongly_typed_fields(self, journal_path):
        journal_path.write_text('{"seq":"1","timestamp":5,"event":"Faucet","args":{}}\n')
        with pytest.raises(CorruptJournal):
            read_journal(journal_path)

    def test_tampered_event_payload(self, genesis, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        lines = journal_path.read_text().splitlines()
        doctored = []
        for line in lines:
            record = json.loads(line)
            if record["event"] == "BidPlaced" and record["args"]["amount"].startswith("35"):
                record["args"]["amount"] = str(10**30)  # more than the bidder holds
            doctored.append(json.dumps(record))
        journal_path.write_text("\n".join(doctored) + "\n")
        with pytest.raises(CorruptJournal):
            replay_journal(journal_path, genesis)

    def test_genesis_mismatch(self, journal_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        other = make_genesis(genesis_time=GENESIS_TIME + 7)
        with pytest.raises(GenesisMismatch):
            replay_journal(journal_path, other)

    def test_headerless_journal_requires_config(self, tmp_path):
        path = tmp_path / "no-header.ndjson"
        path.write_bytes(b"")
        with pytest.raises(GenesisMismatch):
            replay_journal(path)


class TestWriterDurability:
    def test_append_is_flushed_immediately(self, genesis, journal_path):
        writer = JournalWriter(journal_path)
        writer.write_genesis(genesis)
        ledger = Ledger(genesis, sink=writer.append)
        ledger.faucet(genesis.sma_address, genesis.sma_address, 1)
        # read through a separate handle without closing the writer
        header, records = read_journal(journal_path)
        assert header == genesis and len(records) == 1
        writer.close()

    def test_sink_failure_aborts_command(self, genesis, journal_path):
        writer = JournalWriter(journal_path)
        writer.write_genesis(genesis)
        ledger = Ledger(genesis, sink=writer.append)
        before = ledger.state_hash()
        writer.close()  # closed fd makes the next append fail
        with pytest.raises(PersistenceFailure):
            ledger.faucet(genesis.sma_address, genesis.sma_address, 1)
        assert ledger.state_hash() == before
        assert ledger.events == []


class TestSnapshot:
    def test_write_load_round_trip(self, tmp_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        snap_path = tmp_path / "snapshot.json"
        write_snapshot(snap_path, journaled_ledger)
        snap = load_snapshot(snap_path)
        assert snap["seq"] == journaled_ledger.last_seq
        assert snap["state_hash"] == journaled_ledger.state_hash()

    def test_restore_equals_source(self, genesis, tmp_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        snap_path = tmp_path / "snapshot.json"
        write_snapshot(snap_path, journaled_ledger)
        snap = load_snapshot(snap_path)
        restored = Ledger.from_state(genesis, snap["state"], snap["seq"])
        assert restored.state_hash() == journaled_ledger.state_hash()
        assert restored.last_seq == journaled_ledger.last_seq

    def test_snapshot_plus_tail_equals_full_replay(self, genesis, journal_path, journaled_ledger):
        checkpoints = run_canonical_auction(journaled_ledger)
        # snapshot mid-history, then fold the rest of the journal on top
        header, records = read_journal(journal_path)
        cut = len(records) // 2
        partial = Ledger.replay(genesis, records[:cut])
        snap_path = journal_path.parent / "snapshot.json"
        write_snapshot(snap_path, partial)
        snap = load_snapshot(snap_path)
        restored = Ledger.from_state(genesis, snap["state"], snap["seq"])
        for record in records[cut:]:
            restored._fold(record)
        full = Ledger.replay(genesis, records)
        assert restored.state_hash() == full.state_hash() == journaled_ledger.state_hash()
        assert restored.user_of(checkpoints["token_id"]) == journaled_ledger.user_of(
            checkpoints["token_id"]
        )

    def test_tampered_snapshot_detected(self, tmp_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        snap_path = tmp_path / "snapshot.json"
        write_snapshot(snap_path, journaled_ledger)
        payload = json.loads(snap_path.read_text())
        payload["state"]["issuance"] = 0
        snap_path.write_text(json.dumps(payload))
        with pytest.raises(SnapshotUnusable):
            load_snapshot(snap_path)

    def test_missing_snapshot(self, tmp_path):
        with pytest.raises(SnapshotUnusable):
            load_snapshot(tmp_path / "none.json")

    def test_genesis_mismatch_on_restore(self, tmp_path, journaled_ledger):
        run_canonical_auction(journaled_ledger)
        snap_path = tmp_path / "snapshot.json"
        write_snapshot(snap_path, journaled_ledger)
        snap = load_snapshot(snap_path)
        with pytest.raises(GenesisMismatch):
            Ledger.from_state(make_genesis(genesis_time=1), snap["state"], snap["seq"])
