"""Deterministic event-sourced ledger for auctioning leases on
non-fungible spectrum tokens."""

from .errors import LedgerError
from .ledger import Ledger
from .model import EventRecord, GenesisConfig

__version__ = "0.1.0"

__all__ = ["EventRecord", "GenesisConfig", "Ledger", "LedgerError", "__version__"]
