"""Operator and test-harness command line.

Direct commands are thin wrappers over the HTTP endpoints; `scenario run`
drives a scripted sequence with expectations; `verify-journal` replays a
journal offline. Exit codes: 0 success, 1 expectation or domain failure,
2 transport or parse failure.
"""

from __future__ import annotations

import json as jsonlib
import sys
from pathlib import Path

import click
import requests

from .errors import CorruptJournal, GenesisMismatch, PersistenceFailure
from .journal import replay_journal
from .model import GenesisConfig
from .scenario import (
    ScenarioParseError,
    ScenarioRunner,
    ServiceUnreachable,
    bundled_scenario_names,
    load_scenario,
)
from .service import DEFAULT_PORT, load_config, serve as run_service

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_TRANSPORT = 2


class Client:
    def __init__(self, server: str, caller: str | None, json_output: bool):
        self.server = server.rstrip("/")
        self.caller = caller
        self.json_output = json_output

    def call(self, method: str, path: str, body: dict | None = None) -> dict:
        headers = {"X-Caller-Address": self.caller} if self.caller else {}
        try:
            response = requests.request(
                method, self.server + path, json=body, headers=headers, timeout=10
            )
            return response.json()
        except (requests.RequestException, ValueError) as exc:
            click.echo(f"transport error: {exc}", err=True)
            sys.exit(EXIT_TRANSPORT)

    def finish(self, envelope: dict) -> None:
        """Print the response and exit non-zero on domain errors."""
        if self.json_output:
            click.echo(jsonlib.dumps(envelope, indent=2, sort_keys=True))
        elif envelope.get("ok"):
            data = envelope.get("data")
            if isinstance(data, dict):
                for key, value in data.items():
                    click.echo(f"{key}: {jsonlib.dumps(value) if isinstance(value, (dict, list)) else value}")
            else:
                click.echo(jsonlib.dumps(data))
        else:
            error = envelope.get("error", {})
            click.echo(f"error {error.get('code')}: {error.get('message')}", err=True)
        if not envelope.get("ok"):
            sys.exit(EXIT_FAILED)


pass_client = click.make_pass_decorator(Client)


@click.group()
@click.option("--server", default=f"http://127.0.0.1:{DEFAULT_PORT}", show_default=True,
              envvar="SPECTRUM_LEDGER_SERVER", help="Service base URL.")
@click.option("--caller", default=None, help="Address sent as X-Caller-Address.")
@click.option("--json", "json_output", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, server, caller, json_output):
    """Client for the spectrum ledger service."""
    ctx.obj = Client(server, caller, json_output)


@main.command()
@click.option("--config", "config_path", required=True, envvar="SPECTRUM_LEDGER_CONFIG",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON config with genesis and service settings.")
@click.option("--port", type=int, default=None, help="Override the config's port.")
def serve(config_path, port):
    """Run the ledger service (replays the journal, then accepts requests)."""
    try:
        config = load_config(config_path, port_override=port)
        run_service(config)
    except (CorruptJournal, GenesisMismatch, PersistenceFailure) as exc:
        click.echo(f"refusing to start: [{exc.code}] {exc.message}", err=True)
        sys.exit(EXIT_FAILED)


@main.group()
def scenario():
    """Run or inspect scripted scenarios."""


@scenario.command("list")
def scenario_list():
    """List bundled scenario names."""
    for name in bundled_scenario_names():
        click.echo(name)


@scenario.command("genesis")
@click.argument("source")
def scenario_genesis(source):
    """Print a scenario's genesis config (pipe into a config file)."""
    try:
        data = load_scenario(source)
    except ScenarioParseError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_TRANSPORT)
    genesis = data.get("genesis")
    if genesis is None:
        click.echo("scenario carries no genesis config", err=True)
        sys.exit(EXIT_FAILED)
    click.echo(jsonlib.dumps(genesis, indent=2))


@scenario.command("run")
@click.argument("source")
@pass_client
def scenario_run(client: Client, source):
    """Execute a scenario file (or bundled name) against the server."""
    try:
        data = load_scenario(source)
    except ScenarioParseError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_TRANSPORT)
    runner = ScenarioRunner(client.server)
    try:
        report = runner.run(data)
    except ServiceUnreachable as exc:
        click.echo(f"service unreachable: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT)
    except ScenarioParseError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_TRANSPORT)
    if client.json_output:
        click.echo(jsonlib.dumps(report.to_dict(), indent=2))
    else:
        for step in report.steps:
            mark = "ok " if step.passed else "FAIL"
            detail = f" ({step.detail})" if step.detail else ""
            click.echo(f"[{mark}] step {step.index} {step.op}{detail}")
        click.echo(
            f"{report.name}: {report.passed} passed, {report.failed} failed, "
            f"state hash {report.state_hash}"
        )
    sys.exit(EXIT_OK if report.ok else EXIT_FAILED)


@main.command("verify-journal")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Genesis config; required only when the journal has no header.")
@pass_client
def verify_journal(client: Client, path, config_path):
    """Offline integrity check: replay a journal without a running service."""
    if not Path(path).exists():
        click.echo(f"no such journal: {path}", err=True)
        sys.exit(EXIT_TRANSPORT)
    genesis = None
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            genesis = GenesisConfig.from_dict(jsonlib.load(fh))
    try:
        ledger = replay_journal(path, genesis)
        result = {
            "valid": True,
            "stateHash": ledger.state_hash(),
            "eventCount": ledger.last_seq,
        }
    except (CorruptJournal, GenesisMismatch) as exc:
        result = {"valid": False, "error": {"code": exc.code, "message": exc.message}}
    if client.json_output:
        click.echo(jsonlib.dumps(result, indent=2))
    elif result["valid"]:
        click.echo(f"valid: {result['eventCount']} events, state hash {result['stateHash']}")
    else:
        click.echo(f"invalid: [{result['error']['code']}] {result['error']['message']}")
    sys.exit(EXIT_OK if result["valid"] else EXIT_FAILED)


# -- direct endpoint wrappers -------------------------------------------------

@main.command()
@click.option("--owner", required=True)
@click.option("--start-mhz", type=int, required=True)
@click.option("--end-mhz", type=int, required=True)
@click.option("--location", required=True)
@pass_client
def mint(client: Client, owner, start_mhz, end_mhz, location):
    """Mint tokens over a band (SMA only)."""
    client.finish(client.call("POST", "/admin/mint", {
        "owner": owner, "startFreqMhz": start_mhz, "endFreqMhz": end_mhz,
        "geoLocation": location,
    }))


@main.command()
@click.option("--to", "to_addr", required=True)
@click.option("--amount", required=True, help="Decimal ether amount.")
@pass_client
def faucet(client: Client, to_addr, amount):
    """Credit newly issued funds to an address (SMA only)."""
    client.finish(client.call("POST", "/admin/faucet", {"to": to_addr, "amountEther": amount}))


@main.command("advance-time")
@click.option("--seconds", type=int, required=True)
@pass_client
def advance_time(client: Client, seconds):
    """Advance the sim clock (SMA only)."""
    client.finish(client.call("POST", "/admin/advance-time", {"seconds": seconds}))


@main.command()
@click.argument("token_id", type=int)
@click.option("--auction-duration", type=int, required=True, help="Seconds of bidding.")
@click.option("--lease-duration", type=int, required=True, help="Seconds of lease being sold.")
@click.option("--beneficiary", required=True)
@click.option("--starting-price", required=True, help="Decimal ether amount.")
@pass_client
def start(client: Client, token_id, auction_duration, lease_duration, beneficiary, starting_price):
    """Open an auction for a token's lease term (owner only)."""
    client.finish(client.call("POST", f"/auction/{token_id}/start", {
        "auctionDurationSec": auction_duration,
        "leaseDurationSec": lease_duration,
        "beneficiary": beneficiary,
        "startingPriceEther": starting_price,
    }))


@main.command()
@click.argument("token_id", type=int)
@click.option("--amount", required=True, help="Decimal ether amount.")
@pass_client
def bid(client: Client, token_id, amount):
    """Place a bid."""
    client.finish(client.call("POST", f"/auction/{token_id}/bid", {"amountEther": amount}))


@main.command()
@click.argument("token_id", type=int)
@pass_client
def end(client: Client, token_id):
    """Settle an auction after its end time (owner only)."""
    client.finish(client.call("POST", f"/auction/{token_id}/end"))


@main.command()
@click.argument("token_id", type=int)
@pass_client
def withdraw(client: Client, token_id):
    """Withdraw funds displaced by a higher bid."""
    client.finish(client.call("POST", f"/auction/{token_id}/withdraw"))


@main.command()
@pass_client
def idle(client: Client):
    """List tokens currently under an open auction."""
    envelope = client.call("GET", "/spectrum/idle")
    if client.json_output or not envelope.get("ok"):
        client.finish(envelope)
        return
    entries = envelope["data"]["idle"]
    if not entries:
        click.echo("no idle spectrum")
        return
    for e in entries:
        click.echo(
            f"token {e['tokenId']}  {e['startFreq']}-{e['endFreq']}  {e['location']}  "
            f"ends {e['endTime']}  highest {e['highestBidEther']} ether"
        )


@main.command()
@click.argument("token_id", type=int)
@pass_client
def info(client: Client, token_id):
    """Show a token's full view."""
    client.finish(client.call("GET", f"/nfst/{token_id}"))


@main.command()
@click.argument("token_id", type=int)
@pass_client
def auction(client: Client, token_id):
    """Show an auction's current state."""
    client.finish(client.call("GET", f"/auction/{token_id}"))


@main.command()
@click.argument("address")
@pass_client
def account(client: Client, address):
    """Show an account's balance and role."""
    client.finish(client.call("GET", f"/accounts/{address}"))


@main.command()
@click.option("--since", type=int, default=0, show_default=True)
@pass_client
def events(client: Client, since):
    """Fetch event records with seq greater than --since."""
    envelope = client.call("GET", f"/events?since={since}")
    if client.json_output or not envelope.get("ok"):
        client.finish(envelope)
        return
    for record in envelope["data"]["events"]:
        click.echo(
            f"{record['seq']:>6}  {record['timestamp']}  {record['event']}  "
            f"{jsonlib.dumps(record['args'])}"
        )


@main.command("state-hash")
@pass_client
def state_hash(client: Client):
    """Show the canonical state hash."""
    client.finish(client.call("GET", "/state-hash"))


if __name__ == "__main__":
    main()
