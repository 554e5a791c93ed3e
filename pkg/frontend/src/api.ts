// Typed client for the ledger service. Every mutating call carries the
// selected identity as the X-Caller-Address header; errors surface the
// service's error code and message verbatim.

export interface ApiErrorBody {
  code: string;
  message: string;
}

export interface Envelope<T> {
  ok: boolean;
  seq: number;
  data?: T;
  error?: ApiErrorBody;
}

export class LedgerApiError extends Error {
  readonly code: string;
  readonly seq: number;

  constructor(code: string, message: string, seq: number) {
    super(message);
    this.code = code;
    this.seq = seq;
  }
}

export interface IdleEntry {
  tokenId: number;
  startFreq: string;
  endFreq: string;
  location: string;
  owner: string;
  beneficiary: string;
  endTime: number;
  highestBidEther: string;
  highestBidder: string;
}

export interface TokenView {
  tokenId: number;
  startFreq: string;
  endFreq: string;
  location: string;
  owner: string;
  issuer: string;
  user: string | null;
  expires: number | null;
  status: string;
}

export interface AuctionView {
  tokenId: number;
  beneficiary: string;
  startingPriceEther: string;
  endTime: number;
  leaseDurationSec: number;
  highestBidEther: string;
  highestBidder: string;
  ended: boolean;
}

export interface SettlementView {
  winner: string;
  paidEther: string;
  refunds: Record<string, string>;
}

export interface AccountView {
  address: string;
  balanceEther: string;
  role: string;
}

export interface EventView {
  seq: number;
  timestamp: number;
  event: string;
  args: Record<string, string>;
}

export interface HealthView {
  status: string;
  now: number;
  clockMode: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class LedgerApi {
  baseUrl: string;
  caller: string | null = null;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.caller) {
      headers["X-Caller-Address"] = this.caller;
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const envelope = (await response.json()) as Envelope<T>;
    if (!envelope.ok || envelope.data === undefined) {
      const error = envelope.error ?? { code: "Unknown", message: "malformed response" };
      throw new LedgerApiError(error.code, error.message, envelope.seq ?? 0);
    }
    return envelope.data;
  }

  idleSpectrum(): Promise<{ idle: IdleEntry[] }> {
    return this.request("GET", "/spectrum/idle");
  }

  tokenInfo(tokenId: number): Promise<TokenView> {
    return this.request("GET", `/nfst/${tokenId}`);
  }

  auctionInfo(tokenId: number): Promise<AuctionView> {
    return this.request("GET", `/auction/${tokenId}`);
  }

  accounts(): Promise<{ accounts: AccountView[] }> {
    return this.request("GET", "/accounts");
  }

  account(address: string): Promise<AccountView> {
    return this.request("GET", `/accounts/${address}`);
  }

  events(since: number): Promise<{ events: EventView[] }> {
    return this.request("GET", `/events?since=${since}`);
  }

  healthz(): Promise<HealthView> {
    return this.request("GET", "/healthz");
  }

  stateHash(): Promise<{ stateHash: string; seq: number }> {
    return this.request("GET", "/state-hash");
  }

  startAuction(
    tokenId: number,
    params: {
      auctionDurationSec: number;
      leaseDurationSec: number;
      beneficiary: string;
      startingPriceEther: string;
    },
  ): Promise<AuctionView> {
    return this.request("POST", `/auction/${tokenId}/start`, params);
  }

  bid(tokenId: number, amountEther: string): Promise<AuctionView> {
    return this.request("POST", `/auction/${tokenId}/bid`, { amountEther });
  }

  endAuction(tokenId: number): Promise<SettlementView> {
    return this.request("POST", `/auction/${tokenId}/end`, {});
  }

  withdraw(tokenId: number): Promise<{ refundedEther: string }> {
    return this.request("POST", `/auction/${tokenId}/withdraw`, {});
  }

  // admin surface; not rendered by the UI but shared with test harnesses
  faucet(to: string, amountEther: string): Promise<{ to: string; balanceEther: string }> {
    return this.request("POST", "/admin/faucet", { to, amountEther });
  }

  mint(params: {
    owner: string;
    startFreqMhz: number;
    endFreqMhz: number;
    geoLocation: string;
  }): Promise<{ tokenIds: number[] }> {
    return this.request("POST", "/admin/mint", params);
  }

  advanceTime(seconds: number): Promise<{ now: number }> {
    return this.request("POST", "/admin/advance-time", { seconds });
  }
}
