"""Scripted scenario execution against a running service.

A scenario is a JSON file: {name, genesis, steps}. Steps run strictly in
order; each step names an operation, its parameters (already in wire units),
an optional caller, and an optional expectation (either an error code or a
subset of the response data). The first step whose outcome does not match
aborts the run.

Expectations with literal balances or token ids assume the service was
started fresh from the scenario's genesis config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import requests


class ScenarioParseError(Exception):
    pass


class ServiceUnreachable(Exception):
    pass


_GET_OPS = {
    "idle": lambda p: "/spectrum/idle",
    "info": lambda p: f"/nfst/{p['tokenId']}",
    "auction": lambda p: f"/auction/{p['tokenId']}",
    "account": lambda p: f"/accounts/{p['address']}",
    "events": lambda p: f"/events?since={p.get('since', 0)}",
    "state-hash": lambda p: "/state-hash",
}

_POST_OPS = {
    "faucet": lambda p: "/admin/faucet",
    "mint": lambda p: "/admin/mint",
    "advance-time": lambda p: "/admin/advance-time",
    "start": lambda p: f"/auction/{p['tokenId']}/start",
    "bid": lambda p: f"/auction/{p['tokenId']}/bid",
    "end": lambda p: f"/auction/{p['tokenId']}/end",
    "withdraw": lambda p: f"/auction/{p['tokenId']}/withdraw",
}

_ROUTING_KEYS = ("tokenId", "address", "since")


def bundled_scenario_names() -> list[str]:
    files = resources.files("spectrum_ledger") / "scenarios"
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def load_scenario(source: str | Path) -> dict:
    """Load a scenario from a file path or a bundled name ("six_bidder_auction")."""
    path = Path(source)
    if path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        candidate = resources.files("spectrum_ledger") / "scenarios" / f"{source}.json"
        if not candidate.is_file():
            raise ScenarioParseError(
                f"{source!r} is neither a file nor a bundled scenario "
                f"(bundled: {', '.join(bundled_scenario_names())})"
            )
        text = candidate.read_text(encoding="utf-8")
    try:
        scenario = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(scenario, dict) or not isinstance(scenario.get("steps"), list):
        raise ScenarioParseError("scenario must be an object with a steps list")
    return scenario


def subset_matches(expected: Any, actual: Any) -> bool:
    """True when `actual` contains everything `expected` spells out."""
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(
            key in actual and subset_matches(value, actual[key])
            for key, value in expected.items()
        )
    if isinstance(expected, list):
        return (
            isinstance(actual, list)
            and len(actual) == len(expected)
            and all(subset_matches(e, a) for e, a in zip(expected, actual))
        )
    return expected == actual


@dataclass
class StepOutcome:
    index: int
    op: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"index": self.index, "op": self.op, "passed": self.passed, "detail": self.detail}


@dataclass
class ScenarioReport:
    name: str
    steps: list[StepOutcome] = field(default_factory=list)
    state_hash: str = ""

    @property
    def passed(self) -> int:
        return sum(1 for s in self.steps if s.passed)

    @property
    def failed(self) -> int:
        return sum(1 for s in self.steps if not s.passed)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "passed": self.passed,
            "failed": self.failed,
            "stateHash": self.state_hash,
            "steps": [s.to_dict() for s in self.steps],
        }


class ScenarioRunner:
    def __init__(self, server: str, session: requests.Session | None = None, timeout: float = 10.0):
        self.server = server.rstrip("/")
        self.session = session or requests.Session()
        self.timeout = timeout

    def _call(self, method: str, path: str, body: dict | None, caller: str | None) -> dict:
        headers = {"X-Caller-Address": caller} if caller else {}
        try:
            response = self.session.request(
                method,
                self.server + path,
                json=body,
                headers=headers,
                timeout=self.timeout,
            )
            return response.json()
        except (requests.RequestException, ValueError) as exc:
            raise ServiceUnreachable(f"{method} {path}: {exc}") from exc

    def run(self, scenario: dict) -> ScenarioReport:
        report = ScenarioReport(name=scenario.get("name", "scenario"))
        for index, step in enumerate(scenario["steps"], start=1):
            op = step.get("op", "")
            params = step.get("params", {})
            caller = step.get("caller")
            try:
                if op in _GET_OPS:
                    method, path, body = "GET", _GET_OPS[op](params), None
                elif op in _POST_OPS:
                    method, path = "POST", _POST_OPS[op](params)
                    body = {k: v for k, v in params.items() if k not in _ROUTING_KEYS}
                else:
                    raise ScenarioParseError(f"step {index}: unknown op {op!r}")
            except KeyError as exc:
                raise ScenarioParseError(
                    f"step {index}: op {op!r} is missing param {exc}"
                ) from exc

            envelope = self._call(method, path, body, caller)
            outcome = self._check(index, op, step.get("expect"), envelope)
            report.steps.append(outcome)
            if not outcome.passed:
                break
        try:
            final = self._call("GET", "/state-hash", None, None)
            report.state_hash = final.get("data", {}).get("stateHash", "")
        except ServiceUnreachable:
            pass
        return report

    @staticmethod
    def _check(index: int, op: str, expect: dict | None, envelope: dict) -> StepOutcome:
        ok = bool(envelope.get("ok"))
        if expect is None:
            if ok:
                return StepOutcome(index, op, True)
            return StepOutcome(index, op, False, f"unexpected error: {envelope.get('error')}")
        if "error" in expect:
            code = envelope.get("error", {}).get("code") if not ok else None
            if code == expect["error"]:
                return StepOutcome(index, op, True, f"rejected with {code} as expected")
            return StepOutcome(
                index, op, False,
                f"expected error {expect['error']}, got "
                f"{code if code else 'success'}",
            )
        if "data" in expect:
            if not ok:
                return StepOutcome(index, op, False, f"unexpected error: {envelope.get('error')}")
            if subset_matches(expect["data"], envelope.get("data")):
                return StepOutcome(index, op, True)
            return StepOutcome(
                index, op, False,
                f"data mismatch: expected subset {json.dumps(expect['data'])}, "
                f"got {json.dumps(envelope.get('data'))}",
            )
        return StepOutcome(index, op, False, f"step {index}: expectation must name error or data")
