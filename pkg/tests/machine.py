"""Randomized valid-and-invalid command sequences with invariant checking.

Each MachineRun drives one seeded sequence against a fresh ledger while
keeping independent shadow books (issuance, per-auction debits/refunds/
settlements, owners at mint, accepted bids). After every command it checks:

  (a) conservation: balances + escrow == shadow issuance
  (b) accepted bids strictly increase within an auction
  (c) owner_of never changes after mint
  (d) escrow identity: debited - refunded - settled == live hold + pending
  (e) a rejected command leaves state_hash unchanged
  (f) at sequence end: full replay of the event log reproduces the hash

All randomness comes from one seeded Random, so failures replay exactly.
"""

import random

from spectrum_ledger.errors import LedgerError
from spectrum_ledger.ledger import Ledger
from spectrum_ledger.model import ZERO_ADDRESS

from constants import make_genesis

ETH = 10**18


class ShadowBooks:
    def __init__(self):
        self.debited = 0
        self.refunded = 0
        self.settled = 0


class MachineRun:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.genesis = make_genesis(genesis_time=1_000_000)
        self.ledger = Ledger(self.genesis)
        self.sma = self.genesis.sma_address
        extra = [self._random_address() for _ in range(9)]
        self.accounts = [self.sma] + extra
        self.owners = extra[:3]
        self.shadow_issuance = 0
        self.owner_at_mint: dict[int, str] = {}
        self.accepted_bids: dict[int, list[int]] = {}
        self.start_price: dict[int, int] = {}
        self.books: dict[int, ShadowBooks] = {}
        self.last_clock = self.ledger.now()
        self.accepted = 0
        self.rejected = 0
        self.next_band_start = 1000

    def _random_address(self) -> str:
        return "0x" + "".join(self.rng.choice("0123456789abcdef") for _ in range(40))

    # -- op builders: each performs the call and updates shadows on success --

    def op_faucet(self):
        caller = self.sma if self.rng.random() < 0.85 else self.rng.choice(self.accounts[1:])
        to = self.rng.choice(self.accounts)
        amount = 0 if self.rng.random() < 0.05 else self.rng.randint(1, 10 * ETH)
        self.ledger.faucet(caller, to, amount)
        self.shadow_issuance += amount

    def op_advance_time(self):
        caller = self.sma if self.rng.random() < 0.85 else self.rng.choice(self.accounts[1:])
        delta = 0 if self.rng.random() < 0.05 else self.rng.randint(1, 1500)
        self.ledger.advance_time(caller, delta)

    def op_mint(self):
        caller = self.sma if self.rng.random() < 0.85 else self.rng.choice(self.accounts[1:])
        owner = ZERO_ADDRESS if self.rng.random() < 0.04 else self.rng.choice(self.owners)
        width = self.genesis.min_alloc_mhz * self.rng.randint(1, 3)
        if self.rng.random() < 0.1:
            width += 7  # misaligned
        start = self.next_band_start
        self.next_band_start += width + self.genesis.min_alloc_mhz
        ids = self.ledger.mint_nfst(caller, owner, start, start + width, f"loc{start}")
        for tid in ids:
            self.owner_at_mint[tid] = owner

    def _any_token(self) -> int:
        tokens = sorted(self.ledger.tokens)
        if not tokens or self.rng.random() < 0.05:
            return self.rng.randint(900, 999)
        return self.rng.choice(tokens)

    def _funded_caller(self) -> str:
        funded = [a for a in self.accounts if self.ledger.balances.get(a, 0) > 0]
        if funded and self.rng.random() < 0.75:
            return self.rng.choice(funded)
        return self.rng.choice(self.accounts)

    def _auction_token(self, want_expired: bool) -> int:
        candidates = [
            tid
            for tid, a in sorted(self.ledger.auctions.items())
            if not a.ended and (self.ledger.now() > a.end_time) == want_expired
        ]
        if candidates and self.rng.random() < 0.75:
            return self.rng.choice(candidates)
        return self._any_token()

    def op_set_user(self):
        token_id = self._any_token()
        real_owner = self.owner_at_mint.get(token_id)
        caller = real_owner if real_owner and self.rng.random() < 0.7 else self.rng.choice(self.accounts)
        user = self.rng.choice(self.accounts[1:])
        duration = 0 if self.rng.random() < 0.05 else self.rng.randint(50, 3000)
        self.ledger.set_user(caller, token_id, user, duration)

    def op_start_auction(self):
        token_id = self._any_token()
        real_owner = self.owner_at_mint.get(token_id)
        caller = real_owner if real_owner and self.rng.random() < 0.75 else self.rng.choice(self.accounts)
        auction_duration = 0 if self.rng.random() < 0.05 else self.rng.randint(50, 900)
        lease_duration = self.rng.randint(50, 3000)
        beneficiary = caller if self.rng.random() < 0.5 else self.rng.choice(self.accounts[1:])
        price = self.rng.randint(0, 2 * ETH)
        self.ledger.start_auction(
            caller, token_id, auction_duration, lease_duration, beneficiary, price
        )
        self.accepted_bids[token_id] = []
        self.start_price[token_id] = price
        self.books[token_id] = ShadowBooks()

    def op_bid(self):
        token_id = self._auction_token(want_expired=False)
        caller = self._funded_caller()
        auction = self.ledger.auctions.get(token_id)
        if auction is not None and self.rng.random() < 0.8:
            base = auction.highest_bid
            amount = max(0, base + self.rng.randint(-ETH // 2, 3 * ETH // 2))
        else:
            amount = self.rng.randint(0, 30 * ETH)
        self.ledger.bid(caller, token_id, amount)
        history = self.accepted_bids.setdefault(token_id, [])
        if history:
            assert amount > history[-1], "accepted bid did not strictly increase"
        else:
            assert amount >= self.start_price.get(token_id, 0), "first bid below starting price"
        history.append(amount)
        self.books.setdefault(token_id, ShadowBooks()).debited += amount

    def op_end_auction(self):
        token_id = self._auction_token(want_expired=True)
        real_owner = self.owner_at_mint.get(token_id)
        caller = real_owner if real_owner and self.rng.random() < 0.75 else self.rng.choice(self.accounts)
        lessee_before = (
            self.ledger.user_of(token_id) if token_id in self.ledger.tokens else None
        )
        summary = self.ledger.end_auction(caller, token_id)
        assert lessee_before is None, "settlement overwrote an effective lease"
        books = self.books.setdefault(token_id, ShadowBooks())
        books.settled += summary["paid"]
        books.refunded += sum(summary["refunds"].values())

    def op_withdraw(self):
        owed = [
            (tid, addr)
            for tid, a in sorted(self.ledger.auctions.items())
            for addr, amount in a.pending_returns.items()
            if amount > 0
        ]
        if owed and self.rng.random() < 0.6:
            token_id, caller = self.rng.choice(owed)
        else:
            token_id, caller = self._any_token(), self.rng.choice(self.accounts)
        amount = self.ledger.withdraw(caller, token_id)
        self.books.setdefault(token_id, ShadowBooks()).refunded += amount

    # -- invariant checks ----------------------------------------------------

    def independent_holdings(self) -> int:
        ledger = self.ledger
        total = sum(ledger.balances.values())
        auctions = list(ledger.auctions.values()) + [
            a for archived in ledger.archived_auctions.values() for a in archived
        ]
        for auction in auctions:
            if auction.highest_bidder is not None and not auction.ended:
                total += auction.highest_bid
            total += sum(auction.pending_returns.values())
        return total

    def check_invariants(self):
        ledger = self.ledger
        assert self.independent_holdings() == self.shadow_issuance, "conservation violated"
        for token_id, owner in self.owner_at_mint.items():
            assert ledger.owner_of(token_id) == owner, "owner changed after mint"
        for token_id, auction in ledger.auctions.items():
            books = self.books.get(token_id)
            if books is None:
                continue
            outstanding = books.debited - books.refunded - books.settled
            live = 0 if (auction.ended or auction.highest_bidder is None) else auction.highest_bid
            assert outstanding == live + sum(auction.pending_returns.values()), (
                f"escrow identity broken for token {token_id}"
            )
        assert ledger.now() >= self.last_clock, "clock went backwards"
        self.last_clock = ledger.now()

    # -- driver ----------------------------------------------------------------

    _OPS = [
        ("op_faucet", 16),
        ("op_advance_time", 12),
        ("op_mint", 8),
        ("op_set_user", 8),
        ("op_start_auction", 12),
        ("op_bid", 28),
        ("op_end_auction", 10),
        ("op_withdraw", 6),
    ]

    def step(self):
        names, weights = zip(*self._OPS)
        op = getattr(self, self.rng.choices(names, weights=weights)[0])
        hash_before = self.ledger.state_hash()
        try:
            op()
            self.accepted += 1
        except LedgerError:
            self.rejected += 1
            assert self.ledger.state_hash() == hash_before, (
                "rejected command mutated state"
            )
        self.check_invariants()

    def run(self, steps: int) -> dict:
        # bootstrap so auctions actually happen: funds plus mints come later
        for account in self.accounts[1:8]:
            amount = self.rng.randint(4, 12) * ETH
            self.ledger.faucet(self.sma, account, amount)
            self.shadow_issuance += amount
        for _ in range(steps):
            self.step()
        replayed = Ledger.replay(self.genesis, self.ledger.events)
        assert replayed.state_hash() == self.ledger.state_hash(), "replay hash diverged"
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "tokens": len(self.ledger.tokens),
            "accounts": len(self.ledger.known_addresses()),
        }
