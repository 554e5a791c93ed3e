"""Exact integer money.

All balances and bids are held as non-negative integer wei (1 ether ==
10**18 wei). Ether amounts only exist at the API boundary, as decimal
strings; the conversions below are exact in both directions, so accounting
identities can be asserted with zero tolerance.

Amounts are capped at 2**256 - 1. Python integers never wrap, so the cap is
what turns a runaway credit into an explicit Overflow rejection instead of a
silently huge balance.
"""

from __future__ import annotations

from .errors import InvalidAmount, Overflow

WEI_PER_ETHER = 10**18
MAX_WEI = 2**256 - 1

_ETHER_DECIMALS = 18


def ether_to_wei(text: str) -> int:
    """Parse a decimal ether string ("3.5") into exact wei.

    Accepts only unsigned decimal literals: digits, optionally followed by a
    dot and 1..18 fractional digits. More than 18 fractional digits do not
    correspond to an integer number of wei and are rejected.
    """
    if not isinstance(text, str):
        raise InvalidAmount(f"amount must be a decimal string, got {type(text).__name__}")
    whole, dot, frac = text.partition(".")
    if not whole.isascii() or not whole.isdigit():
        raise InvalidAmount(f"malformed ether amount: {text!r}")
    if dot:
        if not frac.isascii() or not frac.isdigit():
            raise InvalidAmount(f"malformed ether amount: {text!r}")
        if len(frac) > _ETHER_DECIMALS:
            raise InvalidAmount(
                f"more than {_ETHER_DECIMALS} decimal places: {text!r}"
            )
    wei = int(whole) * WEI_PER_ETHER + int(frac or "0") * 10 ** (_ETHER_DECIMALS - len(frac))
    if wei > MAX_WEI:
        raise Overflow(f"amount exceeds 2**256-1 wei: {text!r}")
    return wei


def wei_to_ether(amount: int) -> str:
    """Render wei as the shortest exact decimal ether string ("3.5", "2")."""
    if amount < 0:
        raise InvalidAmount(f"negative wei: {amount}")
    whole, frac = divmod(amount, WEI_PER_ETHER)
    if frac == 0:
        return str(whole)
    digits = f"{frac:0{_ETHER_DECIMALS}d}".rstrip("0")
    return f"{whole}.{digits}"


def checked_add(a: int, b: int) -> int:
    """Add two wei amounts, rejecting results above the cap."""
    total = a + b
    if total > MAX_WEI:
        raise Overflow(f"wei addition overflows 2**256-1 ({a} + {b})")
    return total
