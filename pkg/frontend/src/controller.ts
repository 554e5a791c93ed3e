// Action layer behind the buttons. main.ts binds DOM controls to these
// functions; the end-to-end harness drives the same functions headlessly, so
// what is tested is exactly what the buttons do.

import {
  AccountView,
  AuctionView,
  EventView,
  IdleEntry,
  LedgerApi,
  SettlementView,
} from "./api.js";
import { canonicalAddress, isEtherAmount } from "./format.js";

export interface AuctionPanel {
  auction: AuctionView;
  serverNow: number;
  secondsLeft: number;
}

export class ViewController {
  selectedTokenId: number | null = null;
  lastEventSeq = 0;

  constructor(readonly api: LedgerApi) {}

  selectIdentity(address: string): string {
    const canonical = canonicalAddress(address);
    this.api.caller = canonical;
    return canonical;
  }

  async knownAccounts(): Promise<AccountView[]> {
    const { accounts } = await this.api.accounts();
    return accounts;
  }

  async refreshIdle(): Promise<IdleEntry[]> {
    const { idle } = await this.api.idleSpectrum();
    return idle;
  }

  selectToken(tokenId: number): void {
    this.selectedTokenId = tokenId;
    this.lastEventSeq = 0;
  }

  async refreshAuction(): Promise<AuctionPanel> {
    if (this.selectedTokenId === null) {
      throw new Error("no token selected");
    }
    const [auction, health] = await Promise.all([
      this.api.auctionInfo(this.selectedTokenId),
      this.api.healthz(),
    ]);
    return {
      auction,
      serverNow: health.now,
      secondsLeft: Math.max(0, auction.endTime - health.now),
    };
  }

  async beneficiary(): Promise<string> {
    return (await this.refreshAuction()).auction.beneficiary;
  }

  async highestBid(): Promise<string> {
    return (await this.refreshAuction()).auction.highestBidEther;
  }

  async newEvents(): Promise<EventView[]> {
    const { events } = await this.api.events(this.lastEventSeq);
    const newest = events.at(-1);
    if (newest !== undefined) {
      this.lastEventSeq = newest.seq;
    }
    return events;
  }

  async startAuction(params: {
    auctionDurationSec: number;
    leaseDurationSec: number;
    beneficiary: string;
    startingPriceEther: string;
  }): Promise<AuctionView> {
    if (this.selectedTokenId === null) {
      throw new Error("no token selected");
    }
    if (!isEtherAmount(params.startingPriceEther)) {
      throw new Error("starting price must be a positive decimal amount");
    }
    return this.api.startAuction(this.selectedTokenId, {
      ...params,
      beneficiary: canonicalAddress(params.beneficiary),
    });
  }

  async placeBid(amountEther: string): Promise<AuctionView> {
    if (this.selectedTokenId === null) {
      throw new Error("no token selected");
    }
    if (!isEtherAmount(amountEther)) {
      throw new Error("bid amount must be a positive decimal amount");
    }
    return this.api.bid(this.selectedTokenId, amountEther);
  }

  async endAuction(): Promise<SettlementView> {
    if (this.selectedTokenId === null) {
      throw new Error("no token selected");
    }
    return this.api.endAuction(this.selectedTokenId);
  }

  async withdraw(): Promise<string> {
    if (this.selectedTokenId === null) {
      throw new Error("no token selected");
    }
    const { refundedEther } = await this.api.withdraw(this.selectedTokenId);
    return refundedEther;
  }
}
