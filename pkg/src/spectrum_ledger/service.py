"""HTTP/JSON API over the ledger.

Every response carries {ok, seq, data | error{code, message}} where seq is the
last applied event seq at response time. Mutating endpoints require the
X-Caller-Address header (a bare address stands in for a wallet signature; do
not expose this service as-is outside a trusted environment). Amounts cross
this boundary as decimal ether strings and are converted to wei exactly.

Request handling may be concurrent, but every mutating request funnels
through one lock around the ledger, and the journal append inside that lock
completes before the response is released.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, TypeVar

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    CorruptJournal,
    GenesisMismatch,
    InvalidAddress,
    LedgerError,
    MalformedRequest,
    MissingCaller,
    PersistenceFailure,
)
from .journal import JournalWriter, read_journal
from .ledger import Ledger
from .model import GenesisConfig, canonical_address, format_mhz
from .money import ether_to_wei, wei_to_ether
from .snapshot import SnapshotUnusable, load_snapshot, write_snapshot

log = logging.getLogger("spectrum_ledger")

T = TypeVar("T")

DEFAULT_PORT = 8545

_STATUS_BY_CODE = {
    "InvalidAddress": 400,
    "InvalidAmount": 400,
    "MalformedRequest": 400,
    "MissingCaller": 401,
    "UnknownToken": 404,
    "NoAuction": 404,
    "PersistenceFailure": 500,
}


@dataclass
class ServiceConfig:
    genesis: GenesisConfig
    journal_path: Path
    snapshot_path: Path
    snapshot_every: int = 100
    port: int = DEFAULT_PORT
    host: str = "127.0.0.1"
    ui_dir: Path | None = None

    def __post_init__(self):
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


def load_config(path: str | Path, port_override: int | None = None) -> ServiceConfig:
    """Read a JSON config file. Genesis keys are required alongside optional
    service keys (port, data_dir, journal_path, snapshot_path, snapshot_every,
    ui_dir); relative paths resolve against the config file's directory."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    genesis = GenesisConfig.from_dict(raw)
    base = path.parent
    data_dir = Path(raw.get("data_dir", base / "data"))
    if not data_dir.is_absolute():
        data_dir = base / data_dir

    def resolve(key: str, default: Path) -> Path:
        value = raw.get(key)
        if value is None:
            return default
        value = Path(value)
        return value if value.is_absolute() else base / value

    ui_dir = raw.get("ui_dir")
    return ServiceConfig(
        genesis=genesis,
        journal_path=resolve("journal_path", data_dir / "journal.ndjson"),
        snapshot_path=resolve("snapshot_path", data_dir / "snapshot.json"),
        snapshot_every=int(raw.get("snapshot_every", 100)),
        port=port_override if port_override is not None else int(raw.get("port", DEFAULT_PORT)),
        host=str(raw.get("host", "127.0.0.1")),
        ui_dir=Path(ui_dir) if ui_dir else None,
    )


class LedgerService:
    """Owns the ledger, its journal, and the snapshot schedule."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._lock = threading.RLock()
        self._ledger = self._recover()
        self._writer = JournalWriter(config.journal_path)
        if self._ledger.last_seq == 0:
            existing_header, existing_records = read_journal(config.journal_path)
            if existing_header is None and not existing_records:
                self._writer.write_genesis(config.genesis)
        self._ledger.sink = self._writer.append
        every = config.snapshot_every
        self._next_snapshot_at = (self._ledger.last_seq // every + 1) * every

    def _recover(self) -> Ledger:
        """Rebuild state from snapshot + journal tail, falling back to a full
        replay whenever the snapshot is unusable. The journal always wins."""
        config = self.config
        header, records = read_journal(config.journal_path)
        if header is not None and header != config.genesis:
            raise GenesisMismatch(
                "journal was written under a different genesis config"
            )
        try:
            snap = load_snapshot(config.snapshot_path)
        except SnapshotUnusable as exc:
            snap = None
            if config.snapshot_path.exists():
                log.warning("ignoring snapshot: %s", exc)
        if snap is not None:
            if snap["seq"] > len(records):
                raise CorruptJournal(
                    f"journal holds {len(records)} events but snapshot is at seq {snap['seq']}"
                )
            try:
                ledger = Ledger.from_state(config.genesis, snap["state"], snap["seq"])
                for record in records[snap["seq"]:]:
                    ledger._fold(record)
                ledger.events[:0] = records[: snap["seq"]]
                return ledger
            except LedgerError as exc:
                log.warning("snapshot replay failed (%s); doing a full replay", exc)
        return Ledger.replay(config.genesis, records)

    @property
    def ledger(self) -> Ledger:
        return self._ledger

    def execute(self, command: Callable[[Ledger], T]) -> tuple[T, int]:
        with self._lock:
            result = command(self._ledger)
            seq = self._ledger.last_seq
            self._maybe_snapshot()
        return result, seq

    def read(self, view: Callable[[Ledger], T]) -> tuple[T, int]:
        with self._lock:
            return view(self._ledger), self._ledger.last_seq

    def last_seq(self) -> int:
        with self._lock:
            return self._ledger.last_seq

    def _maybe_snapshot(self) -> None:
        every = self.config.snapshot_every
        if self._ledger.last_seq < self._next_snapshot_at:
            return
        try:
            write_snapshot(self.config.snapshot_path, self._ledger)
        except PersistenceFailure as exc:
            log.warning("snapshot skipped: %s", exc)
        self._next_snapshot_at = (self._ledger.last_seq // every + 1) * every

    def close(self) -> None:
        self._writer.close()


# ---------------------------------------------------------------------------
# wire renderings
# ---------------------------------------------------------------------------

def render_token(view: dict) -> dict:
    return {
        "tokenId": view["token_id"],
        "startFreq": format_mhz(view["start_mhz"]),
        "endFreq": format_mhz(view["end_mhz"]),
        "location": view["location"],
        "owner": view["owner"],
        "issuer": view["issuer"],
        "user": view["user"],
        "expires": view["expires"],
        "status": view["status"],
    }


def render_auction(view: dict) -> dict:
    return {
        "tokenId": view["token_id"],
        "beneficiary": view["beneficiary"],
        "startingPriceEther": wei_to_ether(view["starting_price"]),
        "endTime": view["end_time"],
        "leaseDurationSec": view["lease_duration"],
        "highestBidEther": wei_to_ether(view["highest_bid"]),
        "highestBidder": view["highest_bidder"] or "",
        "ended": view["ended"],
    }


def render_idle_entry(view: dict) -> dict:
    return {
        "tokenId": view["token_id"],
        "startFreq": format_mhz(view["start_mhz"]),
        "endFreq": format_mhz(view["end_mhz"]),
        "location": view["location"],
        "owner": view["owner"],
        "beneficiary": view["beneficiary"],
        "endTime": view["end_time"],
        "highestBidEther": wei_to_ether(view["highest_bid"]),
        "highestBidder": view["highest_bidder"] or "",
    }


def render_account(view: dict) -> dict:
    return {
        "address": view["address"],
        "balanceEther": wei_to_ether(view["balance"]),
        "role": view["role"],
    }


def render_settlement(summary: dict) -> dict:
    return {
        "winner": summary["winner"] or "",
        "paidEther": wei_to_ether(summary["paid"]),
        "refunds": {addr: wei_to_ether(amount) for addr, amount in summary["refunds"].items()},
    }


# ---------------------------------------------------------------------------
# request parsing helpers
# ---------------------------------------------------------------------------

def _require_caller(header_value: str | None) -> str:
    if header_value is None or header_value == "":
        raise MissingCaller("X-Caller-Address header is required")
    try:
        return canonical_address(header_value)
    except InvalidAddress:
        raise MissingCaller(f"malformed caller address: {header_value!r}") from None


def _require_str(body: dict, key: str) -> str:
    value = body.get(key)
    if not isinstance(value, str):
        raise MalformedRequest(f"field {key!r} must be a string")
    return value


def _require_int(body: dict, key: str) -> int:
    value = body.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedRequest(f"field {key!r} must be an integer")
    return value


def _require_ether(body: dict, key: str) -> int:
    value = body.get(key)
    if isinstance(value, int) and not isinstance(value, bool):
        value = str(value)
    if not isinstance(value, str):
        raise MalformedRequest(f"field {key!r} must be a decimal ether string")
    return ether_to_wei(value)


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        return {}
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedRequest(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise MalformedRequest("request body must be a JSON object")
    return body


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------

def create_app(service: LedgerService) -> FastAPI:
    app = FastAPI(title="spectrum-ledger", docs_url=None, redoc_url=None)

    def ok(data: Any, seq: int) -> JSONResponse:
        return JSONResponse({"ok": True, "seq": seq, "data": data})

    def fail(code: str, message: str, seq: int) -> JSONResponse:
        status = _STATUS_BY_CODE.get(code, 409)
        return JSONResponse(
            {"ok": False, "seq": seq, "error": {"code": code, "message": message}},
            status_code=status,
        )

    @app.exception_handler(LedgerError)
    async def ledger_error_handler(request: Request, exc: LedgerError):
        return fail(exc.code, exc.message, service.last_seq())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return fail("MalformedRequest", str(exc.errors()[:1]), service.last_seq())

    # -- admin -----------------------------------------------------------

    @app.post("/admin/mint")
    async def admin_mint(request: Request, x_caller_address: str | None = Header(None)):
        caller = _require_caller(x_caller_address)
        body = await _json_body(request)
        owner = _require_str(body, "owner")
        start = _require_int(body, "startFreqMhz")
        end = _require_int(body, "endFreqMhz")
        location = _require_str(body, "geoLocation")
        token_ids, seq = service.execute(
            lambda ledger: ledger.mint_nfst(caller, owner, start, end, location)
        )
        return ok({"tokenIds": token_ids}, seq)

    @app.post("/admin/faucet")
    async def admin_faucet(request: Request, x_caller_address: str | None = Header(None)):
        caller = _require_caller(x_caller_address)
        body = await _json_body(request)
        to = _require_str(body, "to")
        amount = _require_ether(body, "amountEther")
        balance, seq = service.execute(lambda ledger: ledger.faucet(caller, to, amount))
        return ok({"to": canonical_address(to), "balanceEther": wei_to_ether(balance)}, seq)

    @app.post("/admin/advance-time")
    async def admin_advance_time(request: Request, x_caller_address: str | None = Header(None)):
        caller = _require_caller(x_caller_address)
        body = await _json_body(request)
        seconds = _require_int(body, "seconds")
        now, seq = service.execute(lambda ledger: ledger.advance_time(caller, seconds))
        return ok({"now": now}, seq)

    # -- spectrum and tokens ----------------------------------------------

    @app.get("/spectrum/idle")
    async def spectrum_idle():
        entries, seq = service.read(lambda ledger: ledger.list_idle())
        return ok({"idle": [render_idle_entry(e) for e in entries]}, seq)

    @app.get("/nfst/{token_id}")
    async def nfst_info(token_id: int):
        view, seq = service.read(lambda ledger: ledger.token_info(token_id))
        return ok(render_token(view), seq)

    # -- auctions ----------------------------------------------------------

    @app.post("/auction/{token_id}/start")
    async def auction_start(
        token_id: int, request: Request, x_caller_address: str | None = Header(None)
    ):
        caller = _require_caller(x_caller_address)
        body = await _json_body(request)
        auction_duration = _require_int(body, "auctionDurationSec")
        lease_duration = _require_int(body, "leaseDurationSec")
        beneficiary = _require_str(body, "beneficiary")
        starting_price = _require_ether(body, "startingPriceEther")
        view, seq = service.execute(
            lambda ledger: ledger.start_auction(
                caller, token_id, auction_duration, lease_duration, beneficiary, starting_price
            )
        )
        return ok(render_auction(view), seq)

    @app.post("/auction/{token_id}/bid")
    async def auction_bid(
        token_id: int, request: Request, x_caller_address: str | None = Header(None)
    ):
        caller = _require_caller(x_caller_address)
        body = await _json_body(request)
        amount = _require_ether(body, "amountEther")
        view, seq = service.execute(lambda ledger: ledger.bid(caller, token_id, amount))
        return ok(render_auction(view), seq)

    @app.post("/auction/{token_id}/end")
    async def auction_end(token_id: int, x_caller_address: str | None = Header(None)):
        caller = _require_caller(x_caller_address)
        summary, seq = service.execute(lambda ledger: ledger.end_auction(caller, token_id))
        return ok(render_settlement(summary), seq)

    @app.post("/auction/{token_id}/withdraw")
    async def auction_withdraw(token_id: int, x_caller_address: str | None = Header(None)):
        caller = _require_caller(x_caller_address)
        amount, seq = service.execute(lambda ledger: ledger.withdraw(caller, token_id))
        return ok({"refundedEther": wei_to_ether(amount)}, seq)

    @app.get("/auction/{token_id}")
    async def auction_info(token_id: int):
        view, seq = service.read(lambda ledger: ledger.auction_info(token_id))
        return ok(render_auction(view), seq)

    # -- accounts, events, health ------------------------------------------

    @app.get("/accounts")
    async def accounts_list():
        views, seq = service.read(
            lambda ledger: [ledger.account_view(a) for a in ledger.known_addresses()]
        )
        return ok({"accounts": [render_account(v) for v in views]}, seq)

    @app.get("/accounts/{address}")
    async def account_info(address: str):
        view, seq = service.read(lambda ledger: ledger.account_view(address))
        return ok(render_account(view), seq)

    @app.get("/events")
    async def events(since: int = 0):
        records, seq = service.read(lambda ledger: ledger.events_since(since))
        return ok(
            {
                "events": [
                    {"seq": r.seq, "timestamp": r.timestamp, "event": r.event, "args": r.args}
                    for r in records
                ]
            },
            seq,
        )

    @app.get("/healthz")
    async def healthz():
        payload, seq = service.read(
            lambda ledger: {
                "status": "ok",
                "now": ledger.now(),
                "clockMode": ledger.genesis.clock_mode,
            }
        )
        return ok(payload, seq)

    @app.get("/state-hash")
    async def state_hash():
        digest, seq = service.read(lambda ledger: ledger.state_hash())
        return ok({"stateHash": digest, "seq": seq}, seq)

    ui_dir = service.config.ui_dir
    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    """Blocking entry point: recover state, then accept requests."""
    import uvicorn

    service = LedgerService(config)
    app = create_app(service)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        service.close()
