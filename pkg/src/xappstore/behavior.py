"""Behavior scripts: the interpreted stand-in for an xApp's entrypoint.

A script declares startup subscriptions, an ordered first-hit rule list over
incoming message types, and a health behavior.  The runtime interprets it
verbatim and records what it actually does; whether that matches the manifest
is the conformance checker's concern, not the interpreter's.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError

ACTION_KINDS = {"LOG", "REPLY", "SEND", "IGNORE"}


@dataclass(frozen=True)
class SubscriptionIntent:
    node_selector: str  # gNB ID or "*"
    report_period_ms: int


@dataclass(frozen=True)
class Action:
    kind: str
    mtype: int | None = None
    payload_template: str = ""


@dataclass(frozen=True)
class Rule:
    match_mtype: int
    action: Action


@dataclass(frozen=True)
class HealthBehavior:
    kind: str  # ALWAYS_OK | FAIL_AFTER
    n: int = 0


@dataclass(frozen=True)
class BehaviorScript:
    on_start: tuple = ()
    rules: tuple = ()
    health_behavior: HealthBehavior = HealthBehavior("ALWAYS_OK")
    # rx registrations requested beyond the manifest; honored and recorded so
    # conformance can catch them (see UNDECLARED_RX)
    extra_rx_registrations: frozenset = frozenset()


def parse_behavior(raw: bytes) -> BehaviorScript:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError("malformed_document", "", f"behavior.json not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("malformed_document", "", "behavior top level must be an object")

    allowed = {"on_start", "rules", "health_behavior", "extra_rx_registrations"}
    for key in doc:
        if key not in allowed:
            raise ParseError("unknown_top_level_field", key,
                             f"unknown behavior field {key!r}")

    on_start = []
    for i, intent in enumerate(doc.get("on_start", [])):
        try:
            period = int(intent["report_period_ms"])
            selector = str(intent["node_selector"])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("malformed_document", f"on_start[{i}]", str(e)) from None
        if period <= 0:
            raise ParseError("malformed_document", f"on_start[{i}].report_period_ms",
                             "report period must be positive")
        on_start.append(SubscriptionIntent(selector, period))

    rules = []
    for i, rule in enumerate(doc.get("rules", [])):
        try:
            match_mtype = int(rule["match_mtype"])
            a = rule["action"]
            kind = a["type"]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("malformed_document", f"rules[{i}]", str(e)) from None
        if kind not in ACTION_KINDS:
            raise ParseError("malformed_document", f"rules[{i}].action.type",
                             f"unknown action {kind!r}")
        action = Action(
            kind=kind,
            mtype=int(a["mtype"]) if kind in ("REPLY", "SEND") else None,
            payload_template=str(a.get("payload_template", "")))
        rules.append(Rule(match_mtype, action))

    hb = doc.get("health_behavior", "ALWAYS_OK")
    if isinstance(hb, str):
        if hb != "ALWAYS_OK":
            raise ParseError("malformed_document", "health_behavior",
                             f"unknown health behavior {hb!r}")
        health = HealthBehavior("ALWAYS_OK")
    elif isinstance(hb, dict) and hb.get("kind") == "FAIL_AFTER":
        try:
            health = HealthBehavior("FAIL_AFTER", int(hb["n"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("malformed_document", "health_behavior", str(e)) from None
    elif isinstance(hb, dict) and hb.get("kind") == "ALWAYS_OK":
        health = HealthBehavior("ALWAYS_OK")
    else:
        raise ParseError("malformed_document", "health_behavior",
                         f"unrecognized health behavior: {hb!r}")

    extra_rx = frozenset(int(t) for t in doc.get("extra_rx_registrations", []))

    return BehaviorScript(tuple(on_start), tuple(rules), health, extra_rx)
