// DOM wiring for the auction client. All business rules live server-side;
// this file renders state and forwards button clicks to the controller.

import { LedgerApi, LedgerApiError } from "./api.js";
import { ViewController } from "./controller.js";
import { formatCountdown, formatTimestamp, isAddress, shortAddress } from "./format.js";
import { PollLoop } from "./poll.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

function defaultServerUrl(): string {
  // deployment override: define window.LEDGER_SERVER in index.html
  const injected = (window as { LEDGER_SERVER?: string }).LEDGER_SERVER;
  if (injected) {
    return injected;
  }
  const saved = localStorage.getItem("ledger.server");
  if (saved) {
    return saved;
  }
  // served under /ui by the ledger itself: same origin
  return window.location.origin;
}

const api = new LedgerApi(defaultServerUrl());
const controller = new ViewController(api);

let lastPanelEndTime = 0;
let lastPanelServerNow = 0;
let lastPanelFetchedAt = 0;

function setBanner(text: string, kind: "error" | "info" | "none"): void {
  const banner = $("banner");
  banner.textContent = text;
  banner.className = kind === "none" ? "banner hidden" : `banner ${kind}`;
}

function showActionResult(text: string, isError: boolean): void {
  const box = $("action-result");
  box.textContent = text;
  box.className = isError ? "result error" : "result";
}

function describeError(err: unknown): string {
  if (err instanceof LedgerApiError) {
    return `${err.code}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}

async function act<T>(fn: () => Promise<T>, render: (value: T) => string): Promise<void> {
  try {
    const value = await fn();
    showActionResult(render(value), false);
  } catch (err) {
    showActionResult(describeError(err), true);
  }
  await refreshAll().catch(() => undefined);
}

// -- identity -----------------------------------------------------------------

async function populateAccountPicker(): Promise<void> {
  const picker = $<HTMLSelectElement>("identity-picker");
  try {
    const accounts = await controller.knownAccounts();
    const current = picker.value;
    picker.innerHTML = '<option value="">choose identity…</option>';
    for (const account of accounts) {
      const option = document.createElement("option");
      option.value = account.address;
      option.textContent = `${shortAddress(account.address)} (${account.role}, ${account.balanceEther} ether)`;
      picker.appendChild(option);
    }
    picker.value = current;
  } catch {
    // picker stays manual-only until the service is reachable
  }
}

function bindIdentity(): void {
  const picker = $<HTMLSelectElement>("identity-picker");
  const manual = $<HTMLInputElement>("identity-manual");
  const show = $("identity-current");
  const apply = (value: string) => {
    if (!isAddress(value)) {
      showActionResult("identity must be a 0x + 40 hex digit address", true);
      return;
    }
    const canonical = controller.selectIdentity(value);
    show.textContent = shortAddress(canonical);
    setBanner("", "none");
  };
  picker.addEventListener("change", () => picker.value && apply(picker.value));
  $("identity-use").addEventListener("click", () => apply(manual.value.trim()));
}

// -- idle table -----------------------------------------------------------------

async function renderIdleTable(): Promise<void> {
  const body = $("idle-rows");
  const entries = await controller.refreshIdle();
  body.innerHTML = "";
  if (entries.length === 0) {
    body.innerHTML = '<tr><td colspan="6" class="empty">no idle spectrum</td></tr>';
    return;
  }
  for (const entry of entries) {
    const row = document.createElement("tr");
    row.innerHTML =
      `<td>${entry.tokenId}</td><td>${entry.startFreq}–${entry.endFreq}</td>` +
      `<td>${entry.location}</td><td>${shortAddress(entry.beneficiary)}</td>` +
      `<td>${entry.highestBidEther}</td><td>${formatTimestamp(entry.endTime)}</td>`;
    row.className = controller.selectedTokenId === entry.tokenId ? "selected" : "";
    row.addEventListener("click", () => {
      controller.selectToken(entry.tokenId);
      $("selected-token").textContent = String(entry.tokenId);
      $("event-rows").innerHTML = "";
      void refreshAll();
    });
    body.appendChild(row);
  }
}

// -- auction panel ---------------------------------------------------------------

async function renderAuctionPanel(): Promise<void> {
  if (controller.selectedTokenId === null) {
    return;
  }
  const panel = await controller.refreshAuction();
  lastPanelEndTime = panel.auction.endTime;
  lastPanelServerNow = panel.serverNow;
  lastPanelFetchedAt = Date.now();
  $("panel-beneficiary").textContent = panel.auction.beneficiary;
  $("panel-highest").textContent = `${panel.auction.highestBidEther} ether`;
  $("panel-bidder").textContent = panel.auction.highestBidder
    ? shortAddress(panel.auction.highestBidder)
    : "(no bids yet)";
  $("panel-starting").textContent = `${panel.auction.startingPriceEther} ether`;
  $("panel-state").textContent = panel.auction.ended ? "ended" : "open";
  renderCountdown();
}

function renderCountdown(): void {
  if (lastPanelFetchedAt === 0) {
    return;
  }
  const elapsed = Math.floor((Date.now() - lastPanelFetchedAt) / 1000);
  const left = lastPanelEndTime - (lastPanelServerNow + elapsed);
  $("panel-countdown").textContent = formatCountdown(left);
}

// -- event feed --------------------------------------------------------------------

async function renderEvents(): Promise<void> {
  const feed = $("event-rows");
  const events = await controller.newEvents();
  for (const event of events) {
    const row = document.createElement("tr");
    const args = Object.entries(event.args)
      .map(([k, v]) => `${k}=${v}`)
      .join(" ");
    row.innerHTML = `<td>${event.seq}</td><td>${event.event}</td><td>${args}</td>`;
    feed.prepend(row);
  }
  while (feed.childElementCount > 50) {
    feed.lastElementChild?.remove();
  }
}

async function refreshAll(): Promise<void> {
  await Promise.all([renderIdleTable(), renderAuctionPanel(), renderEvents()]);
}

// -- buttons ------------------------------------------------------------------------

function bindButtons(): void {
  $("btn-get-idle").addEventListener("click", () => void act(
    () => controller.refreshIdle(),
    (idle) => `${idle.length} idle token(s)`,
  ));
  $("btn-beneficiary").addEventListener("click", () => void act(
    () => controller.beneficiary(),
    (addr) => `beneficiary: ${addr}`,
  ));
  $("btn-highest").addEventListener("click", () => void act(
    () => controller.highestBid(),
    (amount) => `highest bid: ${amount} ether`,
  ));
  $("btn-bid").addEventListener("click", () => {
    const amount = $<HTMLInputElement>("bid-amount").value.trim();
    void act(
      () => controller.placeBid(amount),
      (auction) => `bid accepted, highest is now ${auction.highestBidEther} ether`,
    );
  });
  $("btn-start").addEventListener("click", () => {
    void act(
      () =>
        controller.startAuction({
          auctionDurationSec: Number($<HTMLInputElement>("start-duration").value),
          leaseDurationSec: Number($<HTMLInputElement>("start-lease").value),
          beneficiary: $<HTMLInputElement>("start-beneficiary").value.trim(),
          startingPriceEther: $<HTMLInputElement>("start-price").value.trim(),
        }),
      (auction) => `auction open until ${formatTimestamp(auction.endTime)}`,
    );
  });
  $("btn-end").addEventListener("click", () => void act(
    () => controller.endAuction(),
    (s) => (s.winner ? `winner ${s.winner} pays ${s.paidEther} ether` : "ended with no bids"),
  ));
  $("btn-withdraw").addEventListener("click", () => void act(
    () => controller.withdraw(),
    (amount) => `${amount} ether returned`,
  ));
  $("btn-server-apply").addEventListener("click", () => {
    const url = $<HTMLInputElement>("server-url").value.trim().replace(/\/+$/, "");
    if (url) {
      localStorage.setItem("ledger.server", url);
      api.baseUrl = url;
      void refreshAll();
      void populateAccountPicker();
    }
  });
}

// -- boot ---------------------------------------------------------------------------

function boot(): void {
  $<HTMLInputElement>("server-url").value = api.baseUrl;
  bindIdentity();
  bindButtons();
  void populateAccountPicker();
  const loop = new PollLoop(1000, {
    onTick: async () => {
      await refreshAll();
      await populateAccountPicker();
    },
    onDisconnect: (failures) =>
      setBanner(`service unreachable (${failures} failed poll${failures > 1 ? "s" : ""})`, "error"),
    onReconnect: () => setBanner("", "none"),
  });
  loop.start();
  setInterval(renderCountdown, 250);
}

boot();
