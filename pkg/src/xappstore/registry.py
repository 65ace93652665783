"""The xApp store registry: records, the onboarding lifecycle state machine,
search, and crash-safe persistence.

Every record moves through SUBMITTED -> VALIDATING -> TESTING -> AVAILABLE ->
DEPLOYED (with failure branches); AVAILABLE and DEPLOYED are reachable only
through a passing acceptance test, and the promotion transition itself checks
that a PASS report is linked.  All transitions land in an append-only audit
log keyed by logical timestamps.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .archive import PackageArchive, peek_name_version
from .errors import (CorruptStore, DuplicateVersion, InvalidTransition,
                     IoFailure, MalformedArchive, UnknownId)
from .manifest import XAppManifest, parse_manifest


class LifecycleState(str, Enum):
    SUBMITTED = "SUBMITTED"
    VALIDATING = "VALIDATING"
    VALIDATION_FAILED = "VALIDATION_FAILED"
    TESTING = "TESTING"
    TEST_FAILED = "TEST_FAILED"
    AVAILABLE = "AVAILABLE"
    DEPLOYED = "DEPLOYED"
    RETIRED = "RETIRED"


class LifecycleEvent(str, Enum):
    VALIDATION_STARTED = "VALIDATION_STARTED"
    VALIDATION_PASSED = "VALIDATION_PASSED"
    VALIDATION_REJECTED = "VALIDATION_REJECTED"
    TEST_PASSED = "TEST_PASSED"
    TEST_REJECTED = "TEST_REJECTED"
    DEPLOY_REQUESTED = "DEPLOY_REQUESTED"
    UNDEPLOY_REQUESTED = "UNDEPLOY_REQUESTED"
    RETIRE = "RETIRE"
    RESUBMIT = "RESUBMIT"


S, E = LifecycleState, LifecycleEvent

TRANSITIONS = {
    (S.SUBMITTED, E.VALIDATION_STARTED): S.VALIDATING,
    (S.VALIDATING, E.VALIDATION_REJECTED): S.VALIDATION_FAILED,
    (S.VALIDATING, E.VALIDATION_PASSED): S.TESTING,
    (S.TESTING, E.TEST_REJECTED): S.TEST_FAILED,
    (S.TESTING, E.TEST_PASSED): S.AVAILABLE,
    (S.AVAILABLE, E.DEPLOY_REQUESTED): S.DEPLOYED,
    (S.AVAILABLE, E.RETIRE): S.RETIRED,
    (S.DEPLOYED, E.UNDEPLOY_REQUESTED): S.AVAILABLE,
    (S.DEPLOYED, E.RETIRE): S.RETIRED,
    (S.VALIDATION_FAILED, E.RESUBMIT): S.SUBMITTED,
    (S.TEST_FAILED, E.RESUBMIT): S.SUBMITTED,
    (S.VALIDATION_FAILED, E.RETIRE): S.RETIRED,
    (S.TEST_FAILED, E.RETIRE): S.RETIRED,
}


@dataclass
class XAppRecord:
    id: str
    package: PackageArchive
    state: LifecycleState = LifecycleState.SUBMITTED
    manifest: XAppManifest | None = None  # set once validation parses it
    name: str | None = None
    version: str | None = None
    reports: list = field(default_factory=list)  # report ids, append-only
    submitted_at: int = 0
    updated_at: int = 0
    version_lineage: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "version": self.version,
            "state": self.state.value,
            "submitted_at": self.submitted_at,
            "updated_at": self.updated_at,
            "reports": list(self.reports),
            "version_lineage": list(self.version_lineage),
        }


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def _checksummed(payload: dict) -> bytes:
    body = json.dumps(payload, sort_keys=True).encode("utf-8")
    return json.dumps({
        "sha256": hashlib.sha256(body).hexdigest(),
        "payload": payload,
    }, sort_keys=True).encode("utf-8")


def _read_checksummed(path: Path) -> dict:
    try:
        doc = json.loads(path.read_bytes().decode("utf-8"))
        stored = doc["sha256"]
        payload = doc["payload"]
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise CorruptStore(f"{path.name}: unreadable ({e})") from None
    body = json.dumps(payload, sort_keys=True).encode("utf-8")
    if hashlib.sha256(body).hexdigest() != stored:
        raise CorruptStore(f"{path.name}: checksum mismatch")
    return payload


def _b64(b: bytes) -> str:
    return base64.b64encode(b).decode("ascii")


def _unb64(s: str) -> bytes:
    return base64.b64decode(s.encode("ascii"))


class Store:
    """Single-tenant registry.  All mutations are serialized behind one lock;
    reads take consistent snapshots under the same lock."""

    def __init__(self, data_dir=None):
        self._lock = threading.RLock()
        self._records: dict[str, XAppRecord] = {}
        self._reports: dict[str, dict] = {}  # report_id -> rendered report obj
        self._audit: list[dict] = []
        self._clock = 0
        self.on_transition = None  # optional callback(entry_dict)
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            try:
                (self.data_dir / "records").mkdir(parents=True, exist_ok=True)
                (self.data_dir / "reports").mkdir(parents=True, exist_ok=True)
            except OSError as e:
                raise IoFailure(f"cannot create data dir: {e}") from None

    # --- time ------------------------------------------------------------

    def _now(self) -> int:
        self._clock += 1
        return self._clock

    # --- submission ------------------------------------------------------

    def submit(self, pkg: PackageArchive) -> XAppRecord:
        """Register a package; byte-identical resubmission is idempotent, a
        (name, version) clash with different content is rejected unless the
        existing record failed, in which case it retires and a fresh record
        takes its place."""
        if not isinstance(pkg.manifest_bytes, bytes) or not pkg.manifest_bytes:
            raise MalformedArchive("manifest bytes missing")
        rid = pkg.digest()[:16]
        name, version = peek_name_version(pkg)
        with self._lock:
            existing = self._records.get(rid)
            if existing is not None and existing.state != S.RETIRED:
                return existing
            lineage = []
            for rec in self._records.values():
                if rec.name == name and rec.id != rid:
                    if rec.state in (S.VALIDATION_FAILED, S.TEST_FAILED):
                        if rec.version == version:
                            self.transition(rec.id, E.RETIRE)
                        lineage.append(rec.id)
                    elif rec.state == S.RETIRED:
                        lineage.append(rec.id)
                    elif rec.version == version and name is not None:
                        raise DuplicateVersion(
                            f"{name} {version} already present as {rec.id}")
                    else:
                        lineage.append(rec.id)
            ts = self._now()
            record = XAppRecord(id=rid, package=pkg, name=name, version=version,
                                submitted_at=ts, updated_at=ts,
                                version_lineage=sorted(set(lineage)))
            self._records[rid] = record
            self._persist_record(record)
            return record

    # --- lifecycle -------------------------------------------------------

    def transition(self, record_id: str, event: LifecycleEvent) -> LifecycleState:
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise UnknownId(f"no record {record_id!r}")
            target = TRANSITIONS.get((record.state, event))
            if target is None:
                raise InvalidTransition(record.state.value, event.value)
            if event == E.TEST_PASSED and not self._has_pass_report(record):
                raise InvalidTransition(
                    record.state.value, event.value,
                    "promotion requires a linked PASS report")
            entry = {"ts": self._now(), "id": record_id,
                     "from": record.state.value, "event": event.value,
                     "to": target.value}
            record.state = target
            record.updated_at = entry["ts"]
            self._audit.append(entry)
            self._append_audit(entry)
            self._persist_record(record)
            if self.on_transition:
                self.on_transition(entry)
            return target

    def _has_pass_report(self, record: XAppRecord) -> bool:
        return any(self._reports.get(rp, {}).get("verdict") == "PASS"
                   for rp in record.reports)

    def attach_report(self, record_id: str, report_obj: dict) -> str:
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise UnknownId(f"no record {record_id!r}")
            report_id = report_obj["report_id"]
            self._reports[report_id] = report_obj
            record.reports.append(report_id)
            record.updated_at = self._now()
            self._persist_report(report_id, report_obj)
            self._persist_record(record)
            return report_id

    def get(self, record_id: str) -> XAppRecord:
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise UnknownId(f"no record {record_id!r}")
            return record

    def get_report(self, report_id: str) -> dict:
        with self._lock:
            report = self._reports.get(report_id)
            if report is None:
                raise UnknownId(f"no report {report_id!r}")
            return report

    def latest_report(self, record_id: str) -> dict:
        with self._lock:
            record = self.get(record_id)
            if not record.reports:
                raise UnknownId(f"record {record_id!r} has no reports")
            return self._reports[record.reports[-1]]

    def audit_log(self) -> list:
        with self._lock:
            return list(self._audit)

    # --- search ----------------------------------------------------------

    def search(self, name_substring=None, state=None, mtype=None) -> list:
        """RETIRED records are excluded unless explicitly asked for by state."""
        with self._lock:
            out = []
            for rec in self._records.values():
                if state is None and rec.state == S.RETIRED:
                    continue
                if state is not None and rec.state != state:
                    continue
                if name_substring is not None:
                    if rec.name is None or name_substring not in rec.name:
                        continue
                if mtype is not None:
                    if rec.manifest is None:
                        continue
                    if (mtype not in rec.manifest.rx_mtypes
                            and mtype not in rec.manifest.tx_mtypes):
                        continue
                out.append(rec)
            out.sort(key=lambda r: (r.name or "", _version_sort_key(r.version)))
            return out

    # --- persistence -----------------------------------------------------

    def _record_payload(self, record: XAppRecord) -> dict:
        return {
            "id": record.id,
            "state": record.state.value,
            "name": record.name,
            "version": record.version,
            "reports": list(record.reports),
            "submitted_at": record.submitted_at,
            "updated_at": record.updated_at,
            "version_lineage": list(record.version_lineage),
            "package": {
                "manifest_b64": _b64(record.package.manifest_bytes),
                "behavior_b64": _b64(record.package.behavior_bytes),
                "assets_b64": {k: _b64(v) for k, v in record.package.assets.items()},
            },
        }

    def _persist_record(self, record: XAppRecord):
        if not self.data_dir:
            return
        try:
            _atomic_write(self.data_dir / "records" / f"{record.id}.json",
                          _checksummed(self._record_payload(record)))
        except OSError as e:
            raise IoFailure(f"persist record {record.id}: {e}") from None

    def _persist_report(self, report_id: str, report_obj: dict):
        if not self.data_dir:
            return
        try:
            _atomic_write(self.data_dir / "reports" / f"{report_id}.json",
                          _checksummed(report_obj))
        except OSError as e:
            raise IoFailure(f"persist report {report_id}: {e}") from None

    def _append_audit(self, entry: dict):
        if not self.data_dir:
            return
        try:
            with open(self.data_dir / "audit.log", "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, sort_keys=True) + "\n")
                f.flush()
                os.fsync(f.fileno())
        except OSError as e:
            raise IoFailure(f"append audit: {e}") from None

    def persist(self):
        """Flush everything; write-through already keeps disk current, so
        this re-writes records and reports for belt and braces."""
        if not self.data_dir:
            return
        with self._lock:
            for record in self._records.values():
                self._persist_record(record)
            for report_id, report in self._reports.items():
                self._persist_report(report_id, report)

    @classmethod
    def load(cls, data_dir, ignore_corrupt: bool = False) -> "Store":
        """Reconstruct a store from disk.  A corrupt record or report file
        raises CorruptStore; with ignore_corrupt the bad file is skipped and
        noted in store.load_warnings, committed records still load."""
        store = cls(data_dir)
        store.load_warnings = []
        records_dir = store.data_dir / "records"
        for path in sorted(records_dir.glob("*.json")):
            try:
                payload = _read_checksummed(path)
                pkg = PackageArchive(
                    _unb64(payload["package"]["manifest_b64"]),
                    _unb64(payload["package"]["behavior_b64"]),
                    {k: _unb64(v)
                     for k, v in payload["package"]["assets_b64"].items()})
                record = XAppRecord(
                    id=payload["id"], package=pkg,
                    state=LifecycleState(payload["state"]),
                    name=payload["name"], version=payload["version"],
                    reports=list(payload["reports"]),
                    submitted_at=payload["submitted_at"],
                    updated_at=payload["updated_at"],
                    version_lineage=list(payload["version_lineage"]))
                if record.state not in (S.SUBMITTED, S.VALIDATION_FAILED, S.RETIRED):
                    try:
                        record.manifest = parse_manifest(pkg.manifest_bytes)
                    except Exception:
                        pass
            except CorruptStore as e:
                if ignore_corrupt:
                    store.load_warnings.append(str(e))
                    continue
                raise
            store._records[record.id] = record
            store._clock = max(store._clock, record.updated_at)
        for path in sorted((store.data_dir / "reports").glob("*.json")):
            try:
                store._reports[path.stem] = _read_checksummed(path)
            except CorruptStore as e:
                if ignore_corrupt:
                    store.load_warnings.append(str(e))
                    continue
                raise
        audit_path = store.data_dir / "audit.log"
        if audit_path.exists():
            for i, line in enumerate(audit_path.read_text("utf-8").splitlines()):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    store._audit.append(entry)
                    store._clock = max(store._clock, entry.get("ts", 0))
                except json.JSONDecodeError:
                    msg = f"audit.log: torn entry at line {i + 1}"
                    if ignore_corrupt:
                        store.load_warnings.append(msg)
                        continue
                    raise CorruptStore(msg) from None
        return store

    def records(self) -> list:
        with self._lock:
            return list(self._records.values())


def _version_sort_key(version):
    # descending version order within a name
    try:
        parts = tuple(int(p) for p in (version or "0.0.0").split("."))
    except ValueError:
        parts = (0, 0, 0)
    return tuple(-p for p in parts)
