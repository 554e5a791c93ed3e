"""Domain types and their wire renderings.

Addresses are kept as canonical lowercase ``0x`` + 40 hex digit strings;
frequencies render as ``"<mhz>MHz"`` in every payload and event arg; token
ids render as decimal strings in event args. Keeping the renderings here, in
one place, is what makes the event log byte-stable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import CorruptJournal, InvalidAddress

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")
_MHZ_RE = re.compile(r"^([0-9]+)MHz$")

ZERO_ADDRESS = "0x" + "0" * 40

CLOCK_SIM = "sim"
CLOCK_WALL = "wall"

STATUS_IDLE = "Idle"
STATUS_OCCUPIED = "Occupied"


def canonical_address(text: str) -> str:
    """Validate and lowercase an address. Comparison is case-insensitive."""
    if not isinstance(text, str) or not _ADDRESS_RE.match(text):
        raise InvalidAddress(f"not a 0x-prefixed 40-hex-digit address: {text!r}")
    return text.lower()


def format_mhz(value: int) -> str:
    return f"{value}MHz"


def parse_mhz(text: str) -> int:
    m = _MHZ_RE.match(text)
    if not m:
        raise ValueError(f"not a MHz rendering: {text!r}")
    return int(m.group(1))


@dataclass(frozen=True)
class SpectrumBand:
    start_mhz: int
    end_mhz: int
    location: str


@dataclass(frozen=True)
class UserGrant:
    """A time-limited usage grant. Effective while now() <= expires; strictly
    after expires it is void with no state mutation (read-time reset)."""

    user: str
    expires: int


@dataclass
class Nfst:
    """One spectrum token. ``owner`` never changes after mint; ``grant`` holds
    the latest lease record even after it lapses (only user_of voids)."""

    token_id: int
    band: SpectrumBand
    owner: str
    issuer: str
    grant: UserGrant | None = None


@dataclass
class Auction:
    """English auction over one token's lease term.

    ``highest_bid`` starts at the reserve price and only carries escrowed
    money once ``highest_bidder`` is set. Funds displaced by a higher bid
    accumulate in ``pending_returns`` until refunded (withdraw or end sweep).
    ``bidders`` keeps first-bid order; the end-of-auction refund loop walks it.
    """

    token_id: int
    beneficiary: str
    starting_price: int
    end_time: int
    lease_duration: int
    highest_bidder: str | None = None
    highest_bid: int = 0
    pending_returns: dict[str, int] = field(default_factory=dict)
    bidders: list[str] = field(default_factory=list)
    ended: bool = False

    def live_hold(self) -> int:
        # Settled auctions hold nothing: the winning bid went to the
        # beneficiary and every pending return was swept.
        if self.ended or self.highest_bidder is None:
            return 0
        return self.highest_bid

    def escrow_total(self) -> int:
        return self.live_hold() + sum(self.pending_returns.values())


@dataclass(frozen=True)
class EventRecord:
    """Append-only log entry. ``args`` is an ordered string-to-string map;
    key order is part of the rendering and survives the JSON round trip."""

    seq: int
    timestamp: int
    event: str
    args: dict[str, str]

    def to_json_line(self) -> str:
        payload = {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "event": self.event,
            "args": self.args,
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "EventRecord":
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptJournal(f"bad journal line: {exc}") from exc
        if not isinstance(payload, dict):
            raise CorruptJournal("journal line is not a JSON object")
        try:
            seq = payload["seq"]
            timestamp = payload["timestamp"]
            event = payload["event"]
            args = payload["args"]
        except KeyError as exc:
            raise CorruptJournal(f"journal line missing field {exc}") from exc
        if (
            not isinstance(seq, int)
            or not isinstance(timestamp, int)
            or not isinstance(event, str)
            or not isinstance(args, dict)
            or not all(isinstance(k, str) and isinstance(v, str) for k, v in args.items())
        ):
            raise CorruptJournal("journal line has wrongly typed fields")
        return cls(seq=seq, timestamp=timestamp, event=event, args=args)


@dataclass(frozen=True)
class GenesisConfig:
    """Everything the deterministic state machine is seeded with."""

    sma_address: str
    clock_mode: str = CLOCK_SIM
    genesis_time: int = 0
    min_alloc_mhz: int = 20

    def __post_init__(self):
        object.__setattr__(self, "sma_address", canonical_address(self.sma_address))
        if self.clock_mode not in (CLOCK_SIM, CLOCK_WALL):
            raise ValueError(f"clock_mode must be 'sim' or 'wall', got {self.clock_mode!r}")
        if not isinstance(self.genesis_time, int) or self.genesis_time < 0:
            raise ValueError(f"genesis_time must be a non-negative integer, got {self.genesis_time!r}")
        if not isinstance(self.min_alloc_mhz, int) or self.min_alloc_mhz <= 0:
            raise ValueError(f"min_alloc_mhz must be a positive integer, got {self.min_alloc_mhz!r}")

    def as_args(self) -> dict[str, str]:
        """String rendering used by the journal's Genesis header line."""
        return {
            "sma_address": self.sma_address,
            "clock_mode": self.clock_mode,
            "genesis_time": str(self.genesis_time),
            "min_alloc_mhz": str(self.min_alloc_mhz),
        }

    @classmethod
    def from_args(cls, args: dict[str, str]) -> "GenesisConfig":
        return cls(
            sma_address=args["sma_address"],
            clock_mode=args["clock_mode"],
            genesis_time=int(args["genesis_time"]),
            min_alloc_mhz=int(args["min_alloc_mhz"]),
        )

    @classmethod
    def from_dict(cls, raw: dict) -> "GenesisConfig":
        """Load from a config-file mapping, ignoring service-level keys."""
        try:
            sma = raw["sma_address"]
        except KeyError:
            raise ValueError("genesis config requires sma_address") from None
        return cls(
            sma_address=sma,
            clock_mode=raw.get("clock_mode", CLOCK_SIM),
            genesis_time=int(raw.get("genesis_time", 0)),
            min_alloc_mhz=int(raw.get("min_alloc_mhz", 20)),
        )
