"""Domain errors.

Every rejection the ledger can produce is a ``LedgerError`` subclass with a
stable machine-readable ``code``. The HTTP layer puts the code verbatim into
error responses and the CLI surfaces it unchanged, so the class names here are
part of the wire contract.
"""

from __future__ import annotations


class LedgerError(Exception):
    """Base class for all domain rejections."""

    code = "LedgerError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# -- permissions and identity ------------------------------------------------

class NotAuthorized(LedgerError):
    code = "NotAuthorized"


class InvalidAddress(LedgerError):
    code = "InvalidAddress"


# -- money -------------------------------------------------------------------

class InvalidAmount(LedgerError):
    code = "InvalidAmount"


class ZeroAmount(LedgerError):
    code = "ZeroAmount"


class Overflow(LedgerError):
    code = "Overflow"


class InsufficientFunds(LedgerError):
    code = "InsufficientFunds"


# -- clock -------------------------------------------------------------------

class NotSimMode(LedgerError):
    code = "NotSimMode"


class ZeroDelta(LedgerError):
    code = "ZeroDelta"


# -- tokens and bands --------------------------------------------------------

class UnknownToken(LedgerError):
    code = "UnknownToken"


class InvalidBand(LedgerError):
    code = "InvalidBand"


class MisalignedBand(LedgerError):
    code = "MisalignedBand"


class AlreadyLeased(LedgerError):
    code = "AlreadyLeased"


class ZeroDuration(LedgerError):
    code = "ZeroDuration"


# -- auctions ----------------------------------------------------------------

class CurrentlyLeased(LedgerError):
    code = "CurrentlyLeased"


class AuctionAlreadyOpen(LedgerError):
    code = "AuctionAlreadyOpen"


class NoOpenAuction(LedgerError):
    code = "NoOpenAuction"


class NoAuction(LedgerError):
    code = "NoAuction"


class AuctionExpired(LedgerError):
    code = "AuctionExpired"


class AuctionStillRunning(LedgerError):
    code = "AuctionStillRunning"


class AlreadyEnded(LedgerError):
    code = "AlreadyEnded"


class SelfOutbid(LedgerError):
    code = "SelfOutbid"


class BidTooLow(LedgerError):
    code = "BidTooLow"


class OwnerBid(LedgerError):
    code = "OwnerBid"


class NothingToWithdraw(LedgerError):
    code = "NothingToWithdraw"


# -- transport ----------------------------------------------------------------

class MalformedRequest(LedgerError):
    code = "MalformedRequest"


class MissingCaller(LedgerError):
    code = "MissingCaller"


# -- persistence and replay --------------------------------------------------

class CorruptJournal(LedgerError):
    code = "CorruptJournal"


class GenesisMismatch(LedgerError):
    code = "GenesisMismatch"


class PersistenceFailure(LedgerError):
    code = "PersistenceFailure"
