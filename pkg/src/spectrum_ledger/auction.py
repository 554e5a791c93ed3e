"""English auction over a token's lease term.

Escrow bookkeeping: an accepted bid debits the bidder immediately; the
displaced highest bidder's hold moves into pending_returns (additive, never
netted against re-bids). Pending funds flow back exactly once, through either
an explicit withdrawal or the end-of-auction sweep, both of which zero the
entry atomically.

Timing boundaries: bids are accepted through end_time inclusive; ending is
valid strictly after end_time.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from .errors import (
    AlreadyEnded,
    AuctionAlreadyOpen,
    AuctionExpired,
    AuctionStillRunning,
    BidTooLow,
    CorruptJournal,
    CurrentlyLeased,
    InsufficientFunds,
    NoAuction,
    NoOpenAuction,
    NotAuthorized,
    NothingToWithdraw,
    OwnerBid,
    SelfOutbid,
    UnknownToken,
    ZeroDuration,
)
from .model import Auction, UserGrant
from .money import MAX_WEI, Overflow, checked_add
from .registry import grant_effective, grant_events

if TYPE_CHECKING:
    from .ledger import Ledger

EVENT_AUCTION_STARTED = "AuctionStarted"
EVENT_BID_PLACED = "BidPlaced"
EVENT_AUCTION_ENDED = "AuctionEnded"
EVENT_WITHDRAWAL = "Withdrawal"

NO_WINNER = ""


def open_auction(ledger: "Ledger", token_id: int) -> Auction | None:
    auction = ledger.auctions.get(token_id)
    if auction is None or auction.ended:
        return None
    return auction


# -- command preparation ------------------------------------------------------

def prepare_start(
    ledger: "Ledger",
    caller: str,
    token_id: int,
    auction_duration: int,
    lease_duration: int,
    beneficiary: str,
    starting_price: int,
    now: int,
) -> list[tuple[str, dict[str, str]]]:
    token = ledger.tokens.get(token_id)
    if token is None:
        raise UnknownToken(f"token {token_id} does not exist")
    if caller != token.owner:
        raise NotAuthorized("only the spectrum owner may start an auction")
    if grant_effective(token.grant, now):
        raise CurrentlyLeased(f"token {token_id} is under an effective lease")
    if open_auction(ledger, token_id) is not None:
        raise AuctionAlreadyOpen(f"token {token_id} already has an open auction")
    if auction_duration <= 0 or lease_duration <= 0:
        raise ZeroDuration("auctionDuration and leaseDuration must be positive")
    if starting_price < 0 or starting_price > MAX_WEI:
        raise Overflow(f"startingPrice out of range: {starting_price}")
    return [
        (
            EVENT_AUCTION_STARTED,
            {
                "tokenId": str(token_id),
                "endTime": str(now + auction_duration),
                "leaseDuration": str(lease_duration),
                "beneficiary": beneficiary,
                "startingPrice": str(starting_price),
            },
        )
    ]


def prepare_bid(
    ledger: "Ledger",
    caller: str,
    token_id: int,
    amount: int,
    now: int,
) -> list[tuple[str, dict[str, str]]]:
    auction = open_auction(ledger, token_id)
    if auction is None:
        raise NoOpenAuction(f"no open auction for token {token_id}")
    if now > auction.end_time:
        raise AuctionExpired(f"bidding closed at {auction.end_time}")
    if caller == auction.highest_bidder:
        raise SelfOutbid("caller already holds the highest bid")
    if caller == auction.beneficiary or caller == ledger.tokens[token_id].owner:
        raise OwnerBid("the owner and the beneficiary may not bid")
    if amount > MAX_WEI:
        raise Overflow(f"bid exceeds 2**256-1 wei: {amount}")
    if auction.highest_bidder is None:
        if amount < auction.starting_price:
            raise BidTooLow(f"bid {amount} below starting price {auction.starting_price}")
    elif amount <= auction.highest_bid:
        raise BidTooLow(f"bid {amount} does not beat {auction.highest_bid}")
    if ledger.balances.get(caller, 0) < amount:
        raise InsufficientFunds(f"balance below bid amount {amount}")
    return [
        (
            EVENT_BID_PLACED,
            {"tokenId": str(token_id), "bidder": caller, "amount": str(amount)},
        )
    ]


def prepare_end(
    ledger: "Ledger",
    caller: str,
    token_id: int,
    now: int,
) -> tuple[dict, list[tuple[str, dict[str, str]]]]:
    """Validate settlement and describe it: (summary, events).

    The summary mirrors what folding the events will do: sweep every positive
    pending return, then pay the beneficiary and grant the lease if there was
    any bid at all.
    """
    auction = ledger.auctions.get(token_id)
    if auction is None:
        raise NoOpenAuction(f"no auction for token {token_id}")
    if caller != ledger.tokens[token_id].owner:
        raise NotAuthorized("only the spectrum owner may end the auction")
    if auction.ended:
        raise AlreadyEnded(f"auction for token {token_id} already ended")
    if now <= auction.end_time:
        raise AuctionStillRunning(f"auction runs until {auction.end_time}")

    winner = auction.highest_bidder
    paid = auction.highest_bid if winner is not None else 0
    refunds = {
        addr: auction.pending_returns[addr]
        for addr in auction.bidders
        if auction.pending_returns.get(addr, 0) > 0
    }
    events = [
        (
            EVENT_AUCTION_ENDED,
            {
                "tokenId": str(token_id),
                "winner": winner if winner is not None else NO_WINNER,
                "amount": str(paid),
            },
        )
    ]
    if winner is not None:
        grant = UserGrant(user=winner, expires=now + auction.lease_duration)
        events.extend(grant_events(token_id, grant))
    summary = {"winner": winner, "paid": paid, "refunds": refunds}
    return summary, events


def prepare_withdraw(
    ledger: "Ledger",
    caller: str,
    token_id: int,
) -> tuple[int, list[tuple[str, dict[str, str]]]]:
    auction = ledger.auctions.get(token_id)
    if auction is None:
        raise NoAuction(f"no auction for token {token_id}")
    amount = auction.pending_returns.get(caller, 0)
    if amount <= 0:
        raise NothingToWithdraw("no pending returns for caller")
    return amount, [
        (
            EVENT_WITHDRAWAL,
            {"tokenId": str(token_id), "bidder": caller, "amount": str(amount)},
        )
    ]


# -- event folds ----------------------------------------------------------------

def fold_auction_started(ledger: "Ledger", args: dict[str, str]) -> None:
    try:
        token_id = int(args["tokenId"])
        auction = Auction(
            token_id=token_id,
            beneficiary=args["beneficiary"],
            starting_price=int(args["startingPrice"]),
            end_time=int(args["endTime"]),
            lease_duration=int(args["leaseDuration"]),
            highest_bid=int(args["startingPrice"]),
        )
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad AuctionStarted args: {exc}") from exc
    if token_id not in ledger.tokens:
        raise CorruptJournal(f"AuctionStarted for unknown token {token_id}")
    previous = ledger.auctions.get(token_id)
    if previous is not None:
        if not previous.ended:
            raise CorruptJournal(f"AuctionStarted while token {token_id} auction open")
        ledger.archived_auctions.setdefault(token_id, []).append(previous)
    ledger.auctions[token_id] = auction


def fold_bid_placed(ledger: "Ledger", args: dict[str, str]) -> None:
    try:
        token_id = int(args["tokenId"])
        bidder = args["bidder"]
        amount = int(args["amount"])
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad BidPlaced args: {exc}") from exc
    auction = ledger.auctions.get(token_id)
    if auction is None or auction.ended:
        raise CorruptJournal(f"BidPlaced without open auction for token {token_id}")
    if ledger.balances.get(bidder, 0) < amount:
        raise CorruptJournal(f"BidPlaced debits more than {bidder} holds")
    ledger.balances[bidder] = ledger.balances.get(bidder, 0) - amount
    if auction.highest_bidder is not None:
        displaced = auction.highest_bidder
        auction.pending_returns[displaced] = checked_add(
            auction.pending_returns.get(displaced, 0), auction.highest_bid
        )
    auction.highest_bidder = bidder
    auction.highest_bid = amount
    if bidder not in auction.bidders:
        auction.bidders.append(bidder)


def fold_auction_ended(ledger: "Ledger", args: dict[str, str]) -> None:
    try:
        token_id = int(args["tokenId"])
        winner = args["winner"]
        amount = int(args["amount"])
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad AuctionEnded args: {exc}") from exc
    auction = ledger.auctions.get(token_id)
    if auction is None or auction.ended:
        raise CorruptJournal(f"AuctionEnded without open auction for token {token_id}")
    auction.ended = True
    for addr in auction.bidders:
        refund = auction.pending_returns.get(addr, 0)
        if refund > 0:
            auction.pending_returns[addr] = 0
            ledger.balances[addr] = checked_add(ledger.balances.get(addr, 0), refund)
    if winner != NO_WINNER:
        if auction.highest_bidder != winner or auction.highest_bid != amount:
            raise CorruptJournal(f"AuctionEnded does not match auction state for token {token_id}")
        ledger.balances[auction.beneficiary] = checked_add(
            ledger.balances.get(auction.beneficiary, 0), amount
        )


def fold_withdrawal(ledger: "Ledger", args: dict[str, str]) -> None:
    try:
        token_id = int(args["tokenId"])
        bidder = args["bidder"]
        amount = int(args["amount"])
    except (KeyError, ValueError) as exc:
        raise CorruptJournal(f"bad Withdrawal args: {exc}") from exc
    auction = ledger.auctions.get(token_id)
    if auction is None or auction.pending_returns.get(bidder, 0) != amount or amount <= 0:
        raise CorruptJournal(f"Withdrawal does not match pending returns for token {token_id}")
    auction.pending_returns[bidder] = 0
    ledger.balances[bidder] = checked_add(ledger.balances.get(bidder, 0), amount)
