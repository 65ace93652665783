"""The Pseudo-RIC: a controlled runtime that deploys behavior scripts as
router endpoints, manages KPM subscriptions toward the scenario, and probes
xApp health on the logical clock.

The same engine serves acceptance testing (records in TESTING) and operator
deployment (records in AVAILABLE); in both cases registration mirrors the
manifest declarations and everything the xApp does is observable through the
router log.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from . import router as rmr
from .behavior import BehaviorScript, parse_behavior
from .errors import NotRunning, WrongState
from .manifest import XAppManifest
from .registry import LifecycleEvent, LifecycleState, Store
from .router import RmrMessage, RmrRouter
from .scenario import World

SUBMGR_ENDPOINT = "_ric/submgr"


@dataclass
class Subscription:
    id: str
    endpoint_id: str
    gnb_id: str
    report_period_ms: int
    created_at: int
    active: bool = True


@dataclass
class RunningXApp:
    record_id: str
    endpoint_id: str
    manifest: XAppManifest
    script: BehaviorScript
    deployed_at: int
    consecutive_failures: int = 0
    alive: bool = True
    probes_seen: int = 0
    probe_history: list = field(default_factory=list)  # (sim_time, ok, alive)
    observed_tx: Counter = field(default_factory=Counter)
    observed_rx: Counter = field(default_factory=Counter)
    indications_by_sub: Counter = field(default_factory=Counter)
    indications_by_gnb: Counter = field(default_factory=Counter)
    registered_rx: frozenset = frozenset()
    notes: list = field(default_factory=list)

    def probe_state(self) -> dict:
        return {"alive": self.alive,
                "consecutive_failures": self.consecutive_failures,
                "probes_seen": self.probes_seen}


class PseudoRic:
    """Owns the running xApps and subscriptions for one router + world."""

    def __init__(self, router: RmrRouter, world: World, store: Store | None = None,
                 event_sink=None):
        self.router = router
        self.world = world
        self.store = store
        self.running: dict[str, RunningXApp] = {}  # record_id -> RunningXApp
        self.subscriptions: dict[str, Subscription] = {}
        self._sub_counter = 0
        self.events: list[dict] = []  # runtime events (XAPP_DIED etc.)
        self._event_sink = event_sink
        if not router.is_registered(SUBMGR_ENDPOINT):
            router.register_endpoint(
                SUBMGR_ENDPOINT,
                rx={rmr.SUBSCRIPTION_REQ},
                tx={rmr.SUBSCRIPTION_RESP, rmr.RIC_INDICATION})

    def _emit(self, kind: str, **data):
        ev = {"kind": kind, "sim_time_ms": self.world.sim_time_ms, **data}
        self.events.append(ev)
        if self._event_sink:
            self._event_sink(ev)

    # --- deploy / undeploy ------------------------------------------------

    def deploy(self, record_id: str) -> RunningXApp:
        """Register the record's xApp on the router and issue its startup
        subscriptions.  Acceptance deploys (TESTING) leave the lifecycle
        alone; operator deploys move AVAILABLE -> DEPLOYED."""
        if self.store is None:
            raise WrongState("no registry attached")
        record = self.store.get(record_id)
        if record.state not in (LifecycleState.TESTING, LifecycleState.AVAILABLE):
            raise WrongState(f"record {record_id} is {record.state.value}")
        if record_id in self.running:
            raise WrongState(f"record {record_id} already running")
        manifest = record.manifest
        if manifest is None:
            from .manifest import parse_manifest
            manifest = parse_manifest(record.package.manifest_bytes)
        script = parse_behavior(record.package.behavior_bytes)
        return self._deploy(record, manifest, script)

    def _deploy(self, record, manifest: XAppManifest, script: BehaviorScript) -> RunningXApp:
        endpoint_id = f"xapp/{record.id}"
        # registration mirrors the manifest; extra_rx models an xApp calling
        # the registration API with types beyond its declaration
        rx = frozenset(manifest.rx_mtypes) | script.extra_rx_registrations
        self.router.register_endpoint(endpoint_id, rx=rx, tx=manifest.tx_mtypes)
        x = RunningXApp(record_id=record.id, endpoint_id=endpoint_id,
                        manifest=manifest, script=script,
                        deployed_at=self.world.sim_time_ms,
                        registered_rx=rx)
        self.running[record.id] = x

        for intent in script.on_start:
            gnb_ids = ([g.id for g in self.world.config.gnbs]
                       if intent.node_selector == "*"
                       else [intent.node_selector])
            for gnb_id in gnb_ids:
                payload = json.dumps({"gnb_id": gnb_id,
                                      "report_period_ms": intent.report_period_ms},
                                     sort_keys=True).encode()
                self.router.route(RmrMessage(
                    mtype=rmr.SUBSCRIPTION_REQ, source=endpoint_id,
                    payload=payload, sim_time_ms=self.world.sim_time_ms))
                x.observed_tx[rmr.SUBSCRIPTION_REQ] += 1
        self.process_subscription_requests()

        if record.state == LifecycleState.AVAILABLE:
            self.store.transition(record.id, LifecycleEvent.DEPLOY_REQUESTED)
        self._emit("XAPP_DEPLOYED", record_id=record.id, endpoint=endpoint_id)
        return x

    def undeploy(self, record_id: str):
        x = self.running.pop(record_id, None)
        if x is None:
            raise NotRunning(f"record {record_id} is not running")
        self._teardown(x)
        if self.store is not None:
            record = self.store.get(record_id)
            if record.state == LifecycleState.DEPLOYED:
                self.store.transition(record_id, LifecycleEvent.UNDEPLOY_REQUESTED)
        self._emit("XAPP_UNDEPLOYED", record_id=record_id)

    def _teardown(self, x: RunningXApp):
        for sub in self.subscriptions.values():
            if sub.endpoint_id == x.endpoint_id:
                sub.active = False
        if self.router.is_registered(x.endpoint_id):
            self.router.deregister_endpoint(x.endpoint_id)

    # --- subscription management -----------------------------------------

    def process_subscription_requests(self):
        """Drain the subscription manager mailbox and create subscriptions.
        Requests carry {gnb_id, report_period_ms}; unknown gNBs or periods
        below the tick are refused in the response."""
        for msg in self.router.drain(SUBMGR_ENDPOINT):
            try:
                req = json.loads(msg.payload.decode("utf-8"))
                gnb_id = req["gnb_id"]
                period = int(req["report_period_ms"])
            except (UnicodeDecodeError, json.JSONDecodeError, KeyError,
                    TypeError, ValueError):
                self._respond(msg.source, accepted=False, detail="bad request")
                continue
            known = any(g.id == gnb_id for g in self.world.config.gnbs)
            if not known or period < self.world.config.tick_ms:
                self._respond(msg.source, accepted=False,
                              detail=f"rejected subscription to {gnb_id!r}")
                continue
            self._sub_counter += 1
            sub = Subscription(
                id=f"sub-{self._sub_counter}", endpoint_id=msg.source,
                gnb_id=gnb_id, report_period_ms=period,
                created_at=self.world.sim_time_ms)
            self.subscriptions[sub.id] = sub
            self._respond(msg.source, accepted=True, subscription_id=sub.id)

    def _respond(self, target_endpoint: str, **body):
        self.router.route(RmrMessage(
            mtype=rmr.SUBSCRIPTION_RESP, source=SUBMGR_ENDPOINT,
            payload=json.dumps(body, sort_keys=True).encode(),
            sim_time_ms=self.world.sim_time_ms))

    def active_subscriptions(self) -> list:
        return [s for s in self.subscriptions.values() if s.active]

    # --- script interpreter ----------------------------------------------

    def step_xapp(self, x: RunningXApp) -> list:
        """One logical step: drain the mailbox, apply the first matching rule
        per message.  Sends are routed even when undeclared; detection is the
        conformance checker's job, not the runtime's."""
        sent = []
        if not self.router.is_registered(x.endpoint_id):
            return sent
        for msg in self.router.drain(x.endpoint_id):
            x.observed_rx[msg.mtype] += 1
            if msg.mtype == rmr.RIC_INDICATION:
                try:
                    body = json.loads(msg.payload.decode("utf-8"))
                    x.indications_by_sub[body["subscription_id"]] += 1
                    x.indications_by_gnb[body["gnb_id"]] += 1
                except (UnicodeDecodeError, json.JSONDecodeError, KeyError):
                    pass
            rule = next((r for r in x.script.rules
                         if r.match_mtype == msg.mtype), None)
            if rule is None:
                x.notes.append(f"unmatched mtype {msg.mtype}, ignored")
                continue
            action = rule.action
            if action.kind == "LOG":
                x.notes.append(f"rx mtype {msg.mtype} at {msg.sim_time_ms}")
            elif action.kind == "IGNORE":
                pass
            elif action.kind in ("REPLY", "SEND"):
                out = RmrMessage(
                    mtype=action.mtype, source=x.endpoint_id,
                    payload=action.payload_template.encode("utf-8"),
                    correlation_id=(msg.correlation_id
                                    if action.kind == "REPLY" else None),
                    sim_time_ms=self.world.sim_time_ms)
                self.router.route(out)
                x.observed_tx[action.mtype] += 1
                sent.append(out)
        return sent

    # --- health probing ---------------------------------------------------

    def probe(self, x: RunningXApp):
        """One health probe: FAIL_AFTER{n} succeeds for the first n probes
        and fails from the (n+1)-th on.  Crossing the failure threshold kills
        the xApp: endpoint deregistered, subscriptions cancelled."""
        x.probes_seen += 1
        hb = x.script.health_behavior
        ok = hb.kind == "ALWAYS_OK" or x.probes_seen <= hb.n
        if ok:
            x.consecutive_failures = 0
        else:
            x.consecutive_failures += 1
        threshold = x.manifest.health.failure_threshold
        if x.alive and x.consecutive_failures >= threshold:
            x.alive = False
            self._teardown(x)
            self._emit("XAPP_DIED", record_id=x.record_id,
                       probes_seen=x.probes_seen)
        x.probe_history.append({"sim_time_ms": self.world.sim_time_ms,
                                "ok": ok, "alive": x.alive,
                                "probe_index": x.probes_seen})
        return ok

    # --- clock ------------------------------------------------------------

    def tick(self):
        """One logical tick: accept pending subscription requests, advance the
        world (routing due indications), step every running xApp in
        endpoint-ID order, then run due probes."""
        self.process_subscription_requests()
        events = self.world.tick(self.active_subscriptions())
        for ev in events:
            if ev.kind == "KPM_REPORT":
                ind = ev.data["indication"]
                self.router.route(RmrMessage(
                    mtype=rmr.RIC_INDICATION, source=SUBMGR_ENDPOINT,
                    payload=ind.to_payload(),
                    sim_time_ms=self.world.sim_time_ms))
            if self._event_sink and ev.kind in ("HANDOVER", "KPM_REPORT"):
                self._event_sink(World._strip(ev))
        for x in sorted(self.running.values(), key=lambda x: x.endpoint_id):
            if x.alive:
                self.step_xapp(x)
        for x in sorted(self.running.values(), key=lambda x: x.endpoint_id):
            if not x.alive:
                continue
            period = x.manifest.health.liveness_period_ms
            elapsed = self.world.sim_time_ms - x.deployed_at
            if elapsed > 0 and elapsed % period == 0:
                self.probe(x)
        return events

    def run_for(self, duration_ms: int):
        ticks = duration_ms // self.world.config.tick_ms
        for _ in range(ticks):
            self.tick()

    # --- status -----------------------------------------------------------

    def status(self) -> dict:
        return {
            "sim_time_ms": self.world.sim_time_ms,
            "running_xapps": [
                {"record_id": x.record_id, "endpoint_id": x.endpoint_id,
                 "probe_state": x.probe_state(),
                 "observed_tx": dict(sorted(x.observed_tx.items())),
                 "observed_rx": dict(sorted(x.observed_rx.items()))}
                for x in sorted(self.running.values(), key=lambda x: x.endpoint_id)],
            "subscriptions": [
                {"id": s.id, "endpoint_id": s.endpoint_id, "gnb_id": s.gnb_id,
                 "report_period_ms": s.report_period_ms, "active": s.active}
                for s in self.subscriptions.values()],
            "router_stats": dict(self.router.stats),
        }
