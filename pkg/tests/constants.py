"""Shared fixture data: the canonical six-bidder auction scenario.

The clock numbers are tuned so the settlement grant expires at exactly
1703136913: genesis + auction duration + 1s advance + lease duration.
"""

from spectrum_ledger.model import GenesisConfig
from spectrum_ledger.money import WEI_PER_ETHER

SMA = "0xfc713aab72f97671badcb14669249c4e922fe2bb"
OWNER = "0xdd870fa1b7c4700f2bd7f44238821c26f7392148"

SU1 = "0x5b38da6a701c568545dcfcb03fcb875f56beddc4"
SU2 = "0xab8483f64d9c6d1ecf9b849ae677dd3315835cb2"
SU3 = "0x4b20993bc481177ec7e8f571cecae8a9e22c02db"
PU1 = "0x78731d3ca6b7e34ac0f824c42a7cc18a495cabab"
PU2 = "0x617f2e2fd72fd9d5503197092ac168c91465e7f2"
PU3 = "0x17f6ad8ef982297579c203069c1dbffe4348c372"

WINNER = PU3

GENESIS_TIME = 1702528512
AUCTION_DURATION = 3600
LEASE_DURATION = 604800
EXPECTED_EXPIRES = 1703136913

FUNDING = 5 * WEI_PER_ETHER


def ether(text: str) -> int:
    """Exact wei for a short decimal literal, computed independently of the
    package's parser (digit arithmetic only)."""
    whole, _, frac = text.partition(".")
    return int(whole) * WEI_PER_ETHER + (int(frac) * WEI_PER_ETHER // 10 ** len(frac) if frac else 0)


CANONICAL_BIDS = [
    (SU1, ether("2.0")),
    (SU2, ether("2.5")),
    (SU3, ether("2.8")),
    (PU1, ether("3.0")),
    (PU2, ether("3.1")),
    (PU3, ether("3.5")),
]

BIDDERS = [addr for addr, _ in CANONICAL_BIDS]
LOSERS = BIDDERS[:-1]


def make_genesis(**overrides) -> GenesisConfig:
    params = dict(
        sma_address=SMA,
        clock_mode="sim",
        genesis_time=GENESIS_TIME,
        min_alloc_mhz=20,
    )
    params.update(overrides)
    return GenesisConfig(**params)
