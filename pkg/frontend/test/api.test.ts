import { describe, expect, it } from "vitest";

import { LedgerApi, LedgerApiError } from "../src/api.js";

interface Recorded {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

function fakeFetch(
  responder: (req: Recorded) => { status?: number; body: unknown },
): { fetch: (input: string, init?: RequestInit) => Promise<Response>; calls: Recorded[] } {
  const calls: Recorded[] = [];
  return {
    calls,
    fetch: async (input, init) => {
      const recorded: Recorded = {
        url: input,
        method: init?.method ?? "GET",
        headers: (init?.headers as Record<string, string>) ?? {},
        body: init?.body ? JSON.parse(init.body as string) : undefined,
      };
      calls.push(recorded);
      const { status = 200, body } = responder(recorded);
      return new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });
    },
  };
}

describe("LedgerApi", () => {
  it("unwraps the response envelope", async () => {
    const { fetch } = fakeFetch(() => ({
      body: { ok: true, seq: 3, data: { stateHash: "abc", seq: 3 } },
    }));
    const api = new LedgerApi("http://ledger.test/", fetch);
    expect(await api.stateHash()).toEqual({ stateHash: "abc", seq: 3 });
  });

  it("strips trailing slashes from the base url", async () => {
    const { fetch, calls } = fakeFetch(() => ({ body: { ok: true, seq: 0, data: { idle: [] } } }));
    const api = new LedgerApi("http://ledger.test///", fetch);
    await api.idleSpectrum();
    expect(calls[0]?.url).toBe("http://ledger.test/spectrum/idle");
  });

  it("sends the selected identity on mutating calls", async () => {
    const { fetch, calls } = fakeFetch(() => ({
      body: { ok: true, seq: 1, data: { tokenId: 1, highestBidEther: "2" } },
    }));
    const api = new LedgerApi("http://ledger.test", fetch);
    api.caller = "0x" + "a".repeat(40);
    await api.bid(1, "2.0");
    expect(calls[0]?.method).toBe("POST");
    expect(calls[0]?.url).toBe("http://ledger.test/auction/1/bid");
    expect(calls[0]?.headers["X-Caller-Address"]).toBe("0x" + "a".repeat(40));
    expect(calls[0]?.body).toEqual({ amountEther: "2.0" });
  });

  it("raises LedgerApiError with the service's exact code", async () => {
    const { fetch } = fakeFetch(() => ({
      status: 409,
      body: { ok: false, seq: 9, error: { code: "SelfOutbid", message: "already leading" } },
    }));
    const api = new LedgerApi("http://ledger.test", fetch);
    const failure = await api.bid(1, "2.0").catch((err: unknown) => err);
    expect(failure).toBeInstanceOf(LedgerApiError);
    expect((failure as LedgerApiError).code).toBe("SelfOutbid");
    expect((failure as LedgerApiError).message).toBe("already leading");
    expect((failure as LedgerApiError).seq).toBe(9);
  });

  it("passes the since cursor to the event feed", async () => {
    const { fetch, calls } = fakeFetch(() => ({ body: { ok: true, seq: 8, data: { events: [] } } }));
    const api = new LedgerApi("http://ledger.test", fetch);
    await api.events(5);
    expect(calls[0]?.url).toBe("http://ledger.test/events?since=5");
  });
});
