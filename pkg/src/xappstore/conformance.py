"""Acceptance testing and conformance reporting.

A run deploys the candidate xApp into a fresh Pseudo-RIC + scenario, drives
logical time, and compares what the xApp actually did (registrations, sends,
receives, health) against what its manifest declares.  The resulting report
gates the lifecycle: PASS promotes TESTING -> AVAILABLE, FAIL demotes to
TEST_FAILED.  Warning-severity findings never fail a run.
"""
from __future__ import annotations

import json
import uuid
from dataclasses import dataclass

from . import router as rmr
from .errors import XAppStoreError
from .manifest import XAppManifest, Violation
from .pseudo_ric import PseudoRic
from .registry import LifecycleEvent, LifecycleState, Store
from .router import RmrRouter
from .scenario import ScenarioConfig, World

# parse-reason -> report check code
_PARSE_CODE = {
    "missing_field": "MISSING_FIELD",
    "unknown_top_level_field": "UNKNOWN_FIELD",
    "malformed_document": "MALFORMED_DOCUMENT",
}


@dataclass
class AcceptancePlan:
    scenario: ScenarioConfig
    duration_ms: int
    min_rx_indications: int | None = None  # default: floor(duration/period) - 1
    require_health: bool = True


def new_report(record_id: str, started_at: int = 0) -> dict:
    return {
        "report_id": uuid.uuid4().hex[:12],
        "record_id": record_id,
        "verdict": "PASS",
        "checks": [],
        "started_at": started_at,
        "finished_at": started_at,
    }


def add_check(report: dict, code: str, severity: str, detail: str, evidence=None):
    report["checks"].append({
        "code": code,
        "severity": severity,
        "detail": detail,
        "evidence": list(evidence or []),
    })


def finalize(report: dict, finished_at: int) -> dict:
    report["finished_at"] = finished_at
    failed = any(c["severity"] == "error" for c in report["checks"])
    report["verdict"] = "FAIL" if failed else "PASS"
    return report


def render_report(report: dict) -> bytes:
    """Deterministic canonical JSON; round-trips through parse_report."""
    return json.dumps(report, sort_keys=True, separators=(",", ":")).encode("utf-8")


def parse_report(raw: bytes) -> dict:
    return json.loads(raw.decode("utf-8"))


# --- pure checks ----------------------------------------------------------

def check_message_conformance(observed_tx, observed_rx, m: XAppManifest,
                              evidence_index=None) -> list:
    """Declared-vs-observed message types.  Undeclared traffic is an error;
    declared-but-silent types are warnings only."""
    evidence_index = evidence_index or {}
    checks = []
    for t in sorted(set(observed_tx) - set(m.tx_mtypes)):
        checks.append({"code": "UNDECLARED_TX", "severity": "error",
                       "detail": f"sent mtype {t} not declared in tx_mtypes",
                       "evidence": evidence_index.get(("tx", t), [])})
    for t in sorted(set(observed_rx) - set(m.rx_mtypes)):
        checks.append({"code": "UNDECLARED_RX", "severity": "error",
                       "detail": f"received mtype {t} not declared in rx_mtypes",
                       "evidence": evidence_index.get(("rx", t), [])})
    for t in sorted(set(m.tx_mtypes) - set(observed_tx)):
        checks.append({"code": "UNUSED_DECLARATION", "severity": "warning",
                       "detail": f"declared tx mtype {t} never sent",
                       "evidence": []})
    for t in sorted(set(m.rx_mtypes) - set(observed_rx)):
        checks.append({"code": "UNUSED_DECLARATION", "severity": "warning",
                       "detail": f"declared rx mtype {t} never received",
                       "evidence": []})
    return checks


def check_liveness(probe_history, m: XAppManifest, require_health: bool = True) -> dict:
    """HEALTH_DEAD if the probe loop ever saw the xApp dead, else HEALTH_OK."""
    death = next((p for p in probe_history if not p["alive"]), None)
    if death is not None:
        return {"code": "HEALTH_DEAD",
                "severity": "error" if require_health else "warning",
                "detail": (f"liveness lost at sim_time {death['sim_time_ms']} ms "
                           f"(probe {death['probe_index']}, threshold "
                           f"{m.health.failure_threshold})"),
                "evidence": [{"source": "probe_history",
                              "probe_index": death["probe_index"],
                              "sim_time_ms": death["sim_time_ms"]}]}
    return {"code": "HEALTH_OK", "severity": "info",
            "detail": f"all {len(probe_history)} probes healthy", "evidence": []}


def check_registration(registered_rx, m: XAppManifest, evidence=None) -> list:
    """Registration attempts beyond the manifest: the rx side of bypass."""
    checks = []
    for t in sorted(set(registered_rx) - set(m.rx_mtypes)):
        checks.append({"code": "UNDECLARED_RX", "severity": "error",
                       "detail": f"registered rx interest for undeclared mtype {t}",
                       "evidence": list(evidence or [])})
    return checks


# --- validation report (pre-testing gate) ---------------------------------

def validation_report(record_id: str, violations: list, started_at: int = 0) -> dict:
    """Report for the manifest-validation phase of onboarding."""
    report = new_report(record_id, started_at)
    for v in violations:
        if isinstance(v, Violation):
            add_check(report, v.code, v.severity, f"{v.path}: {v.detail}")
        else:
            add_check(report, v["code"], v["severity"], v["detail"])
    if not any(c["severity"] == "error" for c in report["checks"]):
        add_check(report, "MANIFEST_VALID", "info", "manifest schema-valid")
    return finalize(report, started_at)


def parse_failure_report(record_id: str, parse_error, started_at: int = 0) -> dict:
    code = _PARSE_CODE.get(parse_error.reason, "MALFORMED_DOCUMENT")
    report = new_report(record_id, started_at)
    add_check(report, code, "error",
              f"{parse_error.path or '<document>'}: {parse_error.detail}")
    return finalize(report, started_at)


# --- the acceptance run ---------------------------------------------------

def run_acceptance(store: Store, record_id: str, plan: AcceptancePlan) -> dict:
    """Deploy the record into a fresh Pseudo-RIC + scenario, run the plan's
    logical duration and produce the gating report.  Deploy failures are
    reported as error checks (yielding FAIL), never raised."""
    record = store.get(record_id)
    if record.state != LifecycleState.TESTING:
        raise XAppStoreError(f"record {record_id} not in TESTING")

    router = RmrRouter()
    world = World(plan.scenario)
    ric = PseudoRic(router, world, store)
    report = new_report(record_id, started_at=world.sim_time_ms)

    try:
        x = ric.deploy(record_id)
    except XAppStoreError as e:
        add_check(report, "DEPLOY_FAILURE", "error", e.detail)
        finalize(report, world.sim_time_ms)
        store.attach_report(record_id, report)
        store.transition(record_id, LifecycleEvent.TEST_REJECTED)
        return report

    ric.run_for(plan.duration_ms)

    # evidence: router log entries backing each undeclared observation
    evidence_index = {}
    for rec in router.observation_log():
        if rec.message.source == x.endpoint_id:
            evidence_index.setdefault(("tx", rec.message.mtype), []).append(
                {"source": "router_log", "seq": rec.seq})
        if x.endpoint_id in rec.delivered_to:
            evidence_index.setdefault(("rx", rec.message.mtype), []).append(
                {"source": "router_log", "seq": rec.seq})

    for c in check_message_conformance(x.observed_tx, x.observed_rx,
                                       x.manifest, evidence_index):
        report["checks"].append(c)
    reg_evidence = evidence_index.get(("rx", rmr.RIC_INDICATION), [])
    for c in check_registration(x.registered_rx, x.manifest, reg_evidence):
        if not any(existing["code"] == "UNDECLARED_RX"
                   and existing["detail"] == c["detail"]
                   for existing in report["checks"]):
            report["checks"].append(c)

    report["checks"].append(
        check_liveness(x.probe_history, x.manifest, plan.require_health))

    _check_indications(report, ric, x, plan)

    finalize(report, world.sim_time_ms)
    store.attach_report(record_id, report)
    if report["verdict"] == "PASS":
        store.transition(record_id, LifecycleEvent.TEST_PASSED)
    else:
        store.transition(record_id, LifecycleEvent.TEST_REJECTED)
    return report


def _check_indications(report: dict, ric: PseudoRic, x, plan: AcceptancePlan):
    subs = [s for s in ric.subscriptions.values() if s.endpoint_id == x.endpoint_id]
    if not subs:
        if x.script.on_start:
            add_check(report, "SUBSCRIPTION_FAILED", "error",
                      "startup subscriptions requested but none established")
        return
    for sub in subs:
        expected = plan.min_rx_indications
        if expected is None:
            expected = max(plan.duration_ms // sub.report_period_ms - 1, 0)
        got = x.indications_by_sub.get(sub.id, 0)
        if got < expected:
            add_check(report, "INSUFFICIENT_INDICATIONS", "error",
                      f"subscription {sub.id} ({sub.gnb_id}): received {got} "
                      f"indications, expected at least {expected}",
                      [{"source": "subscription", "id": sub.id}])
        else:
            add_check(report, "INDICATIONS_OK", "info",
                      f"subscription {sub.id} ({sub.gnb_id}): {got} indications")
