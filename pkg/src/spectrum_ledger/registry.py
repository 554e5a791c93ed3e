"""Token registry: band splitting, lease grants, derived status.

Minting splits a licensed band into fixed-width chunks and issues one token
per chunk. Ownership is immutable for a token's whole lifetime; usage rights
travel separately as an expiring grant, and expiry is purely a read-time
comparison (no mutation resets the user).

Status is never stored: a token is Idle exactly while an unended auction
exists for it, Occupied otherwise.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from .errors import (
    AlreadyLeased,
    AuctionAlreadyOpen,
    CorruptJournal,
    InvalidAddress,
    InvalidBand,
    MisalignedBand,
    NotAuthorized,
    UnknownToken,
    ZeroDuration,
)
from .model import (
    STATUS_IDLE,
    STATUS_OCCUPIED,
    ZERO_ADDRESS,
    Nfst,
    SpectrumBand,
    UserGrant,
    format_mhz,
    parse_mhz,
)

if TYPE_CHECKING:
    from .ledger import Ledger

EVENT_MINT_BATCH = "MintBatch"
EVENT_NFST_MINT = "NFSTMint"
EVENT_UPDATE_USER = "UpdateUser"
EVENT_UPDATE_SPECTRUM_STATUS = "UpdateSpectrumStatus"


def split_band(start_mhz: int, end_mhz: int, min_alloc_mhz: int) -> list[tuple[int, int]]:
    """Tile [start, end) into min_alloc-wide chunks, ascending.

    Bands whose width is not a multiple of the allocation unit are rejected
    rather than truncated or overrun: a final chunk past ``end_mhz`` would be
    spectrum the licensee does not hold.
    """
    if start_mhz < 0 or end_mhz < 0:
        raise InvalidBand(f"negative frequency: {start_mhz}..{end_mhz}")
    if start_mhz >= end_mhz:
        raise InvalidBand(f"startFreq must be below endFreq: {start_mhz} >= {end_mhz}")
    if (end_mhz - start_mhz) % min_alloc_mhz != 0:
        raise MisalignedBand(
            f"band width {end_mhz - start_mhz} MHz is not a multiple of {min_alloc_mhz} MHz"
        )
    return [(f, f + min_alloc_mhz) for f in range(start_mhz, end_mhz, min_alloc_mhz)]


def grant_effective(grant: UserGrant | None, now: int) -> bool:
    """A grant is effective through its expiry second, void strictly after."""
    return grant is not None and now <= grant.expires


# -- command preparation (validate, build events, no mutation) ---------------

def prepare_mint(
    ledger: "Ledger",
    caller: str,
    owner: str,
    start_mhz: int,
    end_mhz: int,
    location: str,
) -> tuple[list[int], list[tuple[str, dict[str, str]]]]:
    if caller != ledger.genesis.sma_address:
        raise NotAuthorized("only the SMA may mint")
    if owner == ZERO_ADDRESS:
        raise InvalidAddress("owner must not be the zero address")
    if not location:
        raise InvalidBand("geoLocation must be non-empty")
    chunks = split_band(start_mhz, end_mhz, ledger.genesis.min_alloc_mhz)
    token_ids = list(range(ledger.next_token_id, ledger.next_token_id + len(chunks)))
    events: list[tuple[str, dict[str, str]]] = [
        (
            EVENT_MINT_BATCH,
            {
                "owner": owner,
                "startFreq": format_mhz(start_mhz),
                "endFreq": format_mhz(end_mhz),
                "location": location,
            },
        )
    ]
    for token_id, (lo, hi) in zip(token_ids, chunks):
        events.append(
            (
                EVENT_NFST_MINT,
                {
                    "startFreq": format_mhz(lo),
                    "endFreq": format_mhz(hi),
                    "location": location,
                    "leaseDuration": "0",
                    "NFSTID": str(token_id),
                    "status": STATUS_OCCUPIED,
                },
            )
        )
    return token_ids, events


def prepare_set_user(
    ledger: "Ledger",
    caller: str,
    token_id: int,
    user: str,
    lease_duration: int,
    now: int,
) -> tuple[UserGrant, list[tuple[str, dict[str, str]]]]:
    token = ledger.tokens.get(token_id)
    if token is None:
        raise UnknownToken(f"token {token_id} does not exist")
    if caller != token.owner:
        raise NotAuthorized("only the spectrum owner may set the user")
    if user == ZERO_ADDRESS:
        raise InvalidAddress("user must not be the zero address")
    if grant_effective(token.grant, now):
        raise AlreadyLeased(f"token {token_id} has an effective lease")
    open_auction = ledger.auctions.get(token_id)
    if open_auction is not None and not open_auction.ended:
        raise AuctionAlreadyOpen(f"token {token_id} is under auction")
    if lease_duration <= 0:
        raise ZeroDuration("leaseDuration must be positive")
    grant = UserGrant(user=user, expires=now + lease_duration)
    return grant, grant_events(token_id, grant)


def grant_events(token_id: int, grant: UserGrant) -> list[tuple[str, dict[str, str]]]:
    """The event pair every grant emits, standalone or at settlement."""
    return [
        (
            EVENT_UPDATE_USER,
            {"tokenId": str(token_id), "user": grant.user, "expires": str(grant.expires)},
        ),
        (
            EVENT_UPDATE_SPECTRUM_STATUS,
            {"tokenId": str(token_id), "status": STATUS_OCCUPIED},
        ),
    ]


# -- event folds (the only mutation path) ------------------------------------

def fold_mint_batch(ledger: "Ledger", args: dict[str, str]) -> None:
    try:
        owner = args["owner"]
        start_mhz = parse_mhz(args["startFreq"])
        end_mhz = parse_mhz(args["endFreq"])
        location = args["location"]
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad MintBatch args: {exc}") from exc
    chunks = split_band(start_mhz, end_mhz, ledger.genesis.min_alloc_mhz)
    for lo, hi in chunks:
        token_id = ledger.next_token_id
        ledger.next_token_id += 1
        ledger.tokens[token_id] = Nfst(
            token_id=token_id,
            band=SpectrumBand(start_mhz=lo, end_mhz=hi, location=location),
            owner=owner,
            issuer=ledger.genesis.sma_address,
        )


def fold_nfst_mint(ledger: "Ledger", args: dict[str, str]) -> None:
    # The batch fold already created the token; this record is the public
    # log entry. Cross-check it so a tampered journal cannot drift silently.
    try:
        token_id = int(args["NFSTID"])
        lo = parse_mhz(args["startFreq"])
        hi = parse_mhz(args["endFreq"])
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad NFSTMint args: {exc}") from exc
    token = ledger.tokens.get(token_id)
    if token is None or token.band.start_mhz != lo or token.band.end_mhz != hi:
        raise CorruptJournal(f"NFSTMint record does not match minted token {token_id}")


def fold_update_user(ledger: "Ledger", args: dict[str, str]) -> None:
    try:
        token_id = int(args["tokenId"])
        grant = UserGrant(user=args["user"], expires=int(args["expires"]))
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad UpdateUser args: {exc}") from exc
    token = ledger.tokens.get(token_id)
    if token is None:
        raise CorruptJournal(f"UpdateUser for unknown token {token_id}")
    token.grant = grant


def fold_update_status(ledger: "Ledger", args: dict[str, str]) -> None:
    # Status is derived state; the record exists for log parity only.
    try:
        token_id = int(args["tokenId"])
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad UpdateSpectrumStatus args: {exc}") from exc
    if token_id not in ledger.tokens:
        raise CorruptJournal(f"UpdateSpectrumStatus for unknown token {token_id}")


# -- read views ----------------------------------------------------------------

def status_of(ledger: "Ledger", token_id: int) -> str:
    if token_id not in ledger.tokens:
        raise UnknownToken(f"token {token_id} does not exist")
    auction = ledger.auctions.get(token_id)
    return STATUS_IDLE if auction is not None and not auction.ended else STATUS_OCCUPIED
