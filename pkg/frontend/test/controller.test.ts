import { describe, expect, it } from "vitest";

import { LedgerApi } from "../src/api.js";
import { ViewController } from "../src/controller.js";

const OWNER = "0xDD870fA1b7C4700F2BD7f44238821C26f7392148";

function stubService() {
  // minimal in-memory double of the endpoints the controller touches
  const state = {
    now: 1000,
    endTime: 1600,
    highestBidEther: "1",
    highestBidder: "",
    events: [
      { seq: 1, timestamp: 1000, event: "NFSTMint", args: { NFSTID: "1" } },
      { seq: 2, timestamp: 1000, event: "AuctionStarted", args: { tokenId: "1" } },
    ],
  };
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace("http://stub", "");
    const ok = (data: unknown) =>
      new Response(JSON.stringify({ ok: true, seq: state.events.length, data }), { status: 200 });
    if (path === "/healthz") {
      return ok({ status: "ok", now: state.now, clockMode: "sim" });
    }
    if (path === "/auction/1") {
      return ok({
        tokenId: 1,
        beneficiary: OWNER.toLowerCase(),
        startingPriceEther: "1",
        endTime: state.endTime,
        leaseDurationSec: 600,
        highestBidEther: state.highestBidEther,
        highestBidder: state.highestBidder,
        ended: false,
      });
    }
    if (path.startsWith("/events?since=")) {
      const since = Number(path.split("=")[1]);
      return ok({ events: state.events.filter((e) => e.seq > since) });
    }
    if (path === "/auction/1/bid" && init?.method === "POST") {
      const body = JSON.parse(init.body as string) as { amountEther: string };
      state.highestBidEther = body.amountEther;
      state.highestBidder = (init.headers as Record<string, string>)["X-Caller-Address"];
      state.events.push({
        seq: state.events.length + 1,
        timestamp: state.now,
        event: "BidPlaced",
        args: { tokenId: "1" },
      });
      return ok({
        tokenId: 1,
        beneficiary: OWNER.toLowerCase(),
        startingPriceEther: "1",
        endTime: state.endTime,
        leaseDurationSec: 600,
        highestBidEther: state.highestBidEther,
        highestBidder: state.highestBidder,
        ended: false,
      });
    }
    return new Response(
      JSON.stringify({ ok: false, seq: 0, error: { code: "Unknown", message: path } }),
      { status: 404 },
    );
  };
  return { state, api: new LedgerApi("http://stub", fetchImpl) };
}

describe("ViewController", () => {
  it("canonicalizes the selected identity", () => {
    const { api } = stubService();
    const controller = new ViewController(api);
    expect(controller.selectIdentity(OWNER)).toBe(OWNER.toLowerCase());
    expect(api.caller).toBe(OWNER.toLowerCase());
    expect(() => controller.selectIdentity("garbage")).toThrow();
  });

  it("computes the countdown from the server clock", async () => {
    const { api } = stubService();
    const controller = new ViewController(api);
    controller.selectToken(1);
    const panel = await controller.refreshAuction();
    expect(panel.serverNow).toBe(1000);
    expect(panel.secondsLeft).toBe(600);
  });

  it("refuses malformed bid amounts before any request is sent", async () => {
    const { api } = stubService();
    const controller = new ViewController(api);
    controller.selectToken(1);
    await expect(controller.placeBid("2.")).rejects.toThrow(/decimal/);
    await expect(controller.placeBid("")).rejects.toThrow(/decimal/);
  });

  it("refuses actions without a selected token", async () => {
    const { api } = stubService();
    const controller = new ViewController(api);
    await expect(controller.placeBid("2.0")).rejects.toThrow(/no token selected/);
    await expect(controller.withdraw()).rejects.toThrow(/no token selected/);
  });

  it("advances the event cursor so polls only fetch new events", async () => {
    const { api } = stubService();
    const controller = new ViewController(api);
    controller.selectToken(1);
    const first = await controller.newEvents();
    expect(first.map((e) => e.seq)).toEqual([1, 2]);
    expect(await controller.newEvents()).toEqual([]);

    controller.selectIdentity(OWNER);
    await controller.placeBid("2.5");
    const next = await controller.newEvents();
    expect(next.map((e) => e.event)).toEqual(["BidPlaced"]);
  });

  it("reflects another user's higher bid after a poll", async () => {
    const { api, state } = stubService();
    const controller = new ViewController(api);
    controller.selectToken(1);
    expect((await controller.refreshAuction()).auction.highestBidEther).toBe("1");
    state.highestBidEther = "3.5";
    expect((await controller.refreshAuction()).auction.highestBidEther).toBe("3.5");
  });
});
