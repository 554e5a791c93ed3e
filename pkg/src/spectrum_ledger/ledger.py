"""The deterministic ledger state machine.

State is a pure function of (genesis config, ordered command history). Every
mutating command runs in three steps:

    1. prepare: validate preconditions and build the command's event batch.
       Nothing is mutated; any rejection leaves state bit-identical.
    2. persist: hand the batch to the sink (the journal). If the sink raises,
       the command aborts atomically.
    3. fold: apply each event to state, one by one.

Replay folds the journal's events through the exact same handlers, so a
replayed ledger matches the live one by construction, not by convention.

Clock: in sim mode the clock moves only via advance_time; in wall mode it is
sampled from the system once per applied command and clamped to never run
backwards. Reads never move the clock.
"""

from __future__ import annotations

import hashlib
import json
import time
from typing import Callable, Iterable

from . import auction as auction_ops
from . import registry
from .errors import (
    CorruptJournal,
    GenesisMismatch,
    LedgerError,
    NoAuction,
    NotAuthorized,
    NotSimMode,
    Overflow,
    UnknownToken,
    ZeroAmount,
    ZeroDelta,
)
from .model import (
    CLOCK_SIM,
    CLOCK_WALL,
    Auction,
    EventRecord,
    GenesisConfig,
    Nfst,
    SpectrumBand,
    UserGrant,
    canonical_address,
)
from .money import MAX_WEI, checked_add

EVENT_GENESIS = "Genesis"
EVENT_FAUCET = "Faucet"
EVENT_TIME_ADVANCED = "TimeAdvanced"

EventSink = Callable[[list[EventRecord]], None]

ROLE_SMA = "SMA"
ROLE_PU = "PU"
ROLE_SU = "SU"
ROLE_PLAIN = "PLAIN"

STATE_FORMAT = 1


def _fold_faucet(ledger: "Ledger", args: dict[str, str]) -> None:
    to = args["to"]
    amount = int(args["amount"])
    ledger.balances[to] = checked_add(ledger.balances.get(to, 0), amount)
    ledger.issuance = checked_add(ledger.issuance, amount)


def _fold_time_advanced(ledger: "Ledger", args: dict[str, str]) -> None:
    delta = int(args["seconds"])
    if delta <= 0:
        raise CorruptJournal("TimeAdvanced with non-positive delta")
    ledger.clock += delta


_FOLDS: dict[str, Callable[["Ledger", dict[str, str]], None]] = {
    EVENT_FAUCET: _fold_faucet,
    EVENT_TIME_ADVANCED: _fold_time_advanced,
    registry.EVENT_MINT_BATCH: registry.fold_mint_batch,
    registry.EVENT_NFST_MINT: registry.fold_nfst_mint,
    registry.EVENT_UPDATE_USER: registry.fold_update_user,
    registry.EVENT_UPDATE_SPECTRUM_STATUS: registry.fold_update_status,
    auction_ops.EVENT_AUCTION_STARTED: auction_ops.fold_auction_started,
    auction_ops.EVENT_BID_PLACED: auction_ops.fold_bid_placed,
    auction_ops.EVENT_AUCTION_ENDED: auction_ops.fold_auction_ended,
    auction_ops.EVENT_WITHDRAWAL: auction_ops.fold_withdrawal,
}


class Ledger:
    """Single-writer ledger. Not thread-safe by itself; the service layer
    serializes access. All amounts are integer wei."""

    def __init__(
        self,
        genesis: GenesisConfig,
        sink: EventSink | None = None,
        time_source: Callable[[], float] = time.time,
    ):
        self.genesis = genesis
        self.sink = sink
        self.time_source = time_source

        self.balances: dict[str, int] = {genesis.sma_address: 0}
        self.issuance: int = 0
        self.tokens: dict[int, Nfst] = {}
        self.next_token_id: int = 1
        self.auctions: dict[int, Auction] = {}
        self.archived_auctions: dict[int, list[Auction]] = {}
        self.clock: int = genesis.genesis_time
        self.events: list[EventRecord] = []
        self._last_seq: int = 0

    # ------------------------------------------------------------------
    # commit machinery
    # ------------------------------------------------------------------

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def _effective_now(self) -> int:
        if self.genesis.clock_mode == CLOCK_WALL:
            return max(self.clock, int(self.time_source()))
        return self.clock

    def _commit(self, now: int, pending: list[tuple[str, dict[str, str]]]) -> list[EventRecord]:
        records = [
            EventRecord(seq=self._last_seq + i + 1, timestamp=now, event=name, args=args)
            for i, (name, args) in enumerate(pending)
        ]
        if self.sink is not None:
            self.sink(records)
        for record in records:
            self._fold(record)
        return records

    def _fold(self, record: EventRecord) -> None:
        """Apply one event record. The only code path that mutates state."""
        if record.seq != self._last_seq + 1:
            raise CorruptJournal(
                f"event seq {record.seq} does not follow {self._last_seq}"
            )
        if record.timestamp < self.clock:
            raise CorruptJournal(
                f"event timestamp {record.timestamp} behind clock {self.clock}"
            )
        handler = _FOLDS.get(record.event)
        if handler is None:
            raise CorruptJournal(f"unknown event {record.event!r}")
        self.clock = record.timestamp
        try:
            handler(self, record.args)
        except CorruptJournal:
            raise
        except LedgerError as exc:
            raise CorruptJournal(f"{record.event} record is not applicable: {exc}") from exc
        self._last_seq = record.seq
        self.events.append(record)

    @classmethod
    def replay(cls, genesis: GenesisConfig, records: Iterable[EventRecord]) -> "Ledger":
        """Rebuild state by folding an event journal from genesis."""
        ledger = cls(genesis)
        for record in records:
            ledger._fold(record)
        return ledger

    # ------------------------------------------------------------------
    # mutating commands
    # ------------------------------------------------------------------

    def faucet(self, caller: str, to: str, amount: int) -> int:
        """Credit freshly issued funds. SMA only; tracked for conservation."""
        caller = canonical_address(caller)
        to = canonical_address(to)
        if caller != self.genesis.sma_address:
            raise NotAuthorized("only the SMA may issue funds")
        if amount <= 0:
            raise ZeroAmount("faucet amount must be positive")
        if (
            amount > MAX_WEI
            or self.issuance + amount > MAX_WEI
            or self.balances.get(to, 0) + amount > MAX_WEI
        ):
            raise Overflow("faucet would exceed 2**256-1 wei")
        now = self._effective_now()
        self._commit(now, [(EVENT_FAUCET, {"to": to, "amount": str(amount)})])
        return self.balances[to]

    def advance_time(self, caller: str, delta: int) -> int:
        caller = canonical_address(caller)
        if self.genesis.clock_mode != CLOCK_SIM:
            raise NotSimMode("advance_time requires sim clock mode")
        if caller != self.genesis.sma_address:
            raise NotAuthorized("only the SMA may advance the clock")
        if delta <= 0:
            raise ZeroDelta("delta must be positive")
        now = self._effective_now()
        self._commit(now, [(EVENT_TIME_ADVANCED, {"seconds": str(delta)})])
        return self.clock

    def mint_nfst(
        self, caller: str, owner: str, start_mhz: int, end_mhz: int, location: str
    ) -> list[int]:
        """Split [start, end) into min-alloc chunks and mint one token each.

        Returns the new token ids in ascending frequency order.
        """
        caller = canonical_address(caller)
        owner = canonical_address(owner)
        token_ids, events = registry.prepare_mint(
            self, caller, owner, start_mhz, end_mhz, location
        )
        now = self._effective_now()
        self._commit(now, events)
        return token_ids

    def set_user(self, caller: str, token_id: int, user: str, lease_duration: int) -> UserGrant:
        caller = canonical_address(caller)
        user = canonical_address(user)
        now = self._effective_now()
        grant, events = registry.prepare_set_user(
            self, caller, token_id, user, lease_duration, now
        )
        self._commit(now, events)
        return grant

    def start_auction(
        self,
        caller: str,
        token_id: int,
        auction_duration: int,
        lease_duration: int,
        beneficiary: str,
        starting_price: int,
    ) -> dict:
        caller = canonical_address(caller)
        beneficiary = canonical_address(beneficiary)
        now = self._effective_now()
        events = auction_ops.prepare_start(
            self, caller, token_id, auction_duration, lease_duration,
            beneficiary, starting_price, now,
        )
        self._commit(now, events)
        return self.auction_info(token_id)

    def bid(self, caller: str, token_id: int, amount: int) -> dict:
        caller = canonical_address(caller)
        now = self._effective_now()
        events = auction_ops.prepare_bid(self, caller, token_id, amount, now)
        self._commit(now, events)
        return self.auction_info(token_id)

    def end_auction(self, caller: str, token_id: int) -> dict:
        """Settle: sweep pending returns, pay the beneficiary, grant the lease.

        Returns {winner, paid, refunds}; winner is None for a bidless auction.
        """
        caller = canonical_address(caller)
        now = self._effective_now()
        summary, events = auction_ops.prepare_end(self, caller, token_id, now)
        self._commit(now, events)
        return summary

    def withdraw(self, caller: str, token_id: int) -> int:
        caller = canonical_address(caller)
        amount, events = auction_ops.prepare_withdraw(self, caller, token_id)
        now = self._effective_now()
        self._commit(now, events)
        return amount

    # ------------------------------------------------------------------
    # read views
    # ------------------------------------------------------------------

    def now(self) -> int:
        return self.clock

    def balance_of(self, addr: str) -> int:
        return self.balances.get(canonical_address(addr), 0)

    def _token(self, token_id: int) -> Nfst:
        token = self.tokens.get(token_id)
        if token is None:
            raise UnknownToken(f"token {token_id} does not exist")
        return token

    def owner_of(self, token_id: int) -> str:
        return self._token(token_id).owner

    def user_of(self, token_id: int) -> str | None:
        grant = self._token(token_id).grant
        if registry.grant_effective(grant, self.clock):
            return grant.user
        return None

    def user_expires(self, token_id: int) -> int | None:
        grant = self._token(token_id).grant
        return grant.expires if grant is not None else None

    def status_of(self, token_id: int) -> str:
        return registry.status_of(self, token_id)

    def token_info(self, token_id: int) -> dict:
        token = self._token(token_id)
        return {
            "token_id": token.token_id,
            "start_mhz": token.band.start_mhz,
            "end_mhz": token.band.end_mhz,
            "location": token.band.location,
            "owner": token.owner,
            "issuer": token.issuer,
            "user": self.user_of(token_id),
            "expires": self.user_expires(token_id),
            "status": self.status_of(token_id),
        }

    def list_idle(self) -> list[dict]:
        """Tokens currently under an open auction, ascending by token id."""
        entries = []
        for token_id in sorted(self.tokens):
            auction = self.auctions.get(token_id)
            if auction is None or auction.ended:
                continue
            token = self.tokens[token_id]
            entries.append(
                {
                    "token_id": token_id,
                    "start_mhz": token.band.start_mhz,
                    "end_mhz": token.band.end_mhz,
                    "location": token.band.location,
                    "owner": token.owner,
                    "beneficiary": auction.beneficiary,
                    "end_time": auction.end_time,
                    "highest_bid": auction.highest_bid,
                    "highest_bidder": auction.highest_bidder,
                }
            )
        return entries

    def auction_info(self, token_id: int) -> dict:
        auction = self.auctions.get(token_id)
        if auction is None:
            raise NoAuction(f"no auction for token {token_id}")
        return {
            "token_id": token_id,
            "beneficiary": auction.beneficiary,
            "starting_price": auction.starting_price,
            "end_time": auction.end_time,
            "lease_duration": auction.lease_duration,
            "highest_bid": auction.highest_bid,
            "highest_bidder": auction.highest_bidder,
            "ended": auction.ended,
        }

    def role_of(self, addr: str) -> str:
        addr = canonical_address(addr)
        if addr == self.genesis.sma_address:
            return ROLE_SMA
        if any(token.owner == addr for token in self.tokens.values()):
            return ROLE_PU
        for auction in self._all_auctions():
            if addr in auction.bidders:
                return ROLE_SU
        return ROLE_PLAIN

    def account_view(self, addr: str) -> dict:
        addr = canonical_address(addr)
        return {
            "address": addr,
            "balance": self.balances.get(addr, 0),
            "role": self.role_of(addr),
        }

    def known_addresses(self) -> list[str]:
        known = set(self.balances)
        known.add(self.genesis.sma_address)
        for token in self.tokens.values():
            known.add(token.owner)
        for auction in self._all_auctions():
            known.update(auction.bidders)
            known.add(auction.beneficiary)
        return sorted(known)

    def events_since(self, seq: int) -> list[EventRecord]:
        if seq < 0:
            seq = 0
        return self.events[seq:]

    # ------------------------------------------------------------------
    # accounting identities
    # ------------------------------------------------------------------

    def _all_auctions(self) -> Iterable[Auction]:
        yield from self.auctions.values()
        for archived in self.archived_auctions.values():
            yield from archived

    def total_balances(self) -> int:
        return sum(self.balances.values())

    def total_escrow(self) -> int:
        return sum(auction.escrow_total() for auction in self._all_auctions())

    def assert_conservation(self) -> None:
        """Sum of balances plus auction escrow must equal total issuance."""
        held = self.total_balances() + self.total_escrow()
        if held != self.issuance:
            raise AssertionError(
                f"conservation violated: balances+escrow={held} != issuance={self.issuance}"
            )

    # ------------------------------------------------------------------
    # canonical serialization
    # ------------------------------------------------------------------

    def canonical_state(self) -> dict:
        """Lossless, deterministic state view (excludes the event list).

        Maps are emitted with string keys and serialized key-sorted; list
        order (bidders, archived auctions) is itself deterministic state.
        """
        def auction_view(a: Auction) -> dict:
            return {
                "beneficiary": a.beneficiary,
                "starting_price": a.starting_price,
                "end_time": a.end_time,
                "lease_duration": a.lease_duration,
                "highest_bidder": a.highest_bidder,
                "highest_bid": a.highest_bid,
                "pending_returns": dict(a.pending_returns),
                "bidders": list(a.bidders),
                "ended": a.ended,
            }

        def token_view(t: Nfst) -> dict:
            return {
                "start_mhz": t.band.start_mhz,
                "end_mhz": t.band.end_mhz,
                "location": t.band.location,
                "owner": t.owner,
                "issuer": t.issuer,
                "grant": None
                if t.grant is None
                else {"user": t.grant.user, "expires": t.grant.expires},
            }

        return {
            "format": STATE_FORMAT,
            "genesis": {
                "sma_address": self.genesis.sma_address,
                "clock_mode": self.genesis.clock_mode,
                "genesis_time": self.genesis.genesis_time,
                "min_alloc_mhz": self.genesis.min_alloc_mhz,
            },
            "clock": self.clock,
            "issuance": self.issuance,
            "next_token_id": self.next_token_id,
            "accounts": dict(self.balances),
            "tokens": {str(tid): token_view(t) for tid, t in self.tokens.items()},
            "auctions": {str(tid): auction_view(a) for tid, a in self.auctions.items()},
            "archived_auctions": {
                str(tid): [auction_view(a) for a in archived]
                for tid, archived in self.archived_auctions.items()
                if archived
            },
        }

    def state_hash(self) -> str:
        blob = json.dumps(self.canonical_state(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @classmethod
    def from_state(cls, genesis: GenesisConfig, state: dict, last_seq: int) -> "Ledger":
        """Rebuild a ledger from a canonical_state view (snapshot load)."""
        recorded = state.get("genesis", {})
        if recorded != {
            "sma_address": genesis.sma_address,
            "clock_mode": genesis.clock_mode,
            "genesis_time": genesis.genesis_time,
            "min_alloc_mhz": genesis.min_alloc_mhz,
        }:
            raise GenesisMismatch("snapshot genesis does not match active config")
        ledger = cls(genesis)
        try:
            ledger.clock = int(state["clock"])
            ledger.issuance = int(state["issuance"])
            ledger.next_token_id = int(state["next_token_id"])
            ledger.balances = {addr: int(v) for addr, v in state["accounts"].items()}
            ledger.tokens = {
                int(tid): Nfst(
                    token_id=int(tid),
                    band=SpectrumBand(
                        start_mhz=int(t["start_mhz"]),
                        end_mhz=int(t["end_mhz"]),
                        location=t["location"],
                    ),
                    owner=t["owner"],
                    issuer=t["issuer"],
                    grant=None
                    if t["grant"] is None
                    else UserGrant(user=t["grant"]["user"], expires=int(t["grant"]["expires"])),
                )
                for tid, t in state["tokens"].items()
            }

            def auction_from(tid: str, a: dict) -> Auction:
                return Auction(
                    token_id=int(tid),
                    beneficiary=a["beneficiary"],
                    starting_price=int(a["starting_price"]),
                    end_time=int(a["end_time"]),
                    lease_duration=int(a["lease_duration"]),
                    highest_bidder=a["highest_bidder"],
                    highest_bid=int(a["highest_bid"]),
                    pending_returns={k: int(v) for k, v in a["pending_returns"].items()},
                    bidders=list(a["bidders"]),
                    ended=bool(a["ended"]),
                )

            ledger.auctions = {
                int(tid): auction_from(tid, a) for tid, a in state["auctions"].items()
            }
            ledger.archived_auctions = {
                int(tid): [auction_from(tid, a) for a in archived]
                for tid, archived in state.get("archived_auctions", {}).items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptJournal(f"unreadable snapshot state: {exc}") from exc
        ledger._last_seq = last_seq
        return ledger
