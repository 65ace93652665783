"""Service layer: the onboarding pipeline and the live Pseudo-RIC engine.

One XAppStoreService owns the registry, runs submitted packages through
validation and acceptance testing, and hosts the live scenario that operator
deploys attach to.  Lifecycle transitions and scenario events fan out to any
number of subscriber queues (the gateway's SSE stream reads those).
"""
from __future__ import annotations

import importlib.resources
import json
import queue
import threading

from .archive import PackageArchive, load_archive
from .conformance import (AcceptancePlan, parse_failure_report, run_acceptance,
                          validation_report)
from .errors import NotRunning, ParseError, WrongState, XAppStoreError
from .manifest import parse_manifest, validate_manifest
from .pseudo_ric import PseudoRic
from .registry import LifecycleEvent, LifecycleState, Store
from .router import RmrRouter
from .scenario import ScenarioConfig, World

DEFAULT_RIC_VERSION = "1.4.0"
DEFAULT_ACCEPTANCE_DURATION_MS = 20_000


def builtin_scenario(name: str) -> ScenarioConfig:
    """Load one of the scenarios shipped with the package."""
    ref = importlib.resources.files("xappstore").joinpath(
        "data", "scenarios", f"{name}.json")
    return ScenarioConfig.from_json(ref.read_bytes())


class XAppStoreService:
    def __init__(self, data_dir=None, ric_version: str = DEFAULT_RIC_VERSION,
                 acceptance_scenario: ScenarioConfig | None = None,
                 acceptance_duration_ms: int = DEFAULT_ACCEPTANCE_DURATION_MS,
                 synchronous_pipeline: bool = False):
        if data_dir is not None:
            self.store = Store.load(data_dir)
        else:
            self.store = Store()
        self.ric_version = ric_version
        self.acceptance_scenario = acceptance_scenario or builtin_scenario(
            "two-gnb-crossing")
        self.acceptance_duration_ms = acceptance_duration_ms
        self.synchronous_pipeline = synchronous_pipeline

        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self.store.on_transition = lambda entry: self.publish(
            {"kind": "LIFECYCLE", **entry})

        # live engine
        self.router = RmrRouter()
        self.world: World | None = None
        self.ric: PseudoRic | None = None
        self._driver: threading.Thread | None = None
        self._driver_stop = threading.Event()
        self._engine_lock = threading.RLock()
        self.load_scenario(self.acceptance_scenario)

    # --- event fanout -----------------------------------------------------

    def publish(self, event: dict):
        with self._sub_lock:
            for q in self._subscribers:
                q.put(event)

    def subscribe(self) -> queue.Queue:
        q = queue.Queue()
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    # --- onboarding pipeline ---------------------------------------------

    def onboard(self, archive_bytes: bytes):
        """Accept an uploaded archive and kick off validation + acceptance.
        Returns the record immediately (SUBMITTED); the pipeline advances it."""
        pkg = load_archive(archive_bytes)
        record = self.store.submit(pkg)
        if record.state != LifecycleState.SUBMITTED:
            return record  # idempotent resubmission of a processed package
        if self.synchronous_pipeline:
            self.run_pipeline(record.id)
        else:
            threading.Thread(target=self._pipeline_guarded,
                             args=(record.id,), daemon=True).start()
        return record

    def _pipeline_guarded(self, record_id: str):
        try:
            self.run_pipeline(record_id)
        except XAppStoreError:
            pass

    def run_pipeline(self, record_id: str):
        """SUBMITTED -> VALIDATING -> (VALIDATION_FAILED | TESTING ->
        (TEST_FAILED | AVAILABLE))."""
        store = self.store
        record = store.get(record_id)
        store.transition(record_id, LifecycleEvent.VALIDATION_STARTED)
        try:
            manifest = parse_manifest(record.package.manifest_bytes)
        except ParseError as e:
            store.attach_report(record_id, parse_failure_report(record_id, e))
            store.transition(record_id, LifecycleEvent.VALIDATION_REJECTED)
            return
        result = validate_manifest(manifest, {"ric_version": self.ric_version})
        if not result.valid:
            store.attach_report(
                record_id, validation_report(record_id, result.violations))
            store.transition(record_id, LifecycleEvent.VALIDATION_REJECTED)
            return
        record.manifest = manifest
        store.transition(record_id, LifecycleEvent.VALIDATION_PASSED)
        run_acceptance(store, record_id, self.default_plan())

    def default_plan(self) -> AcceptancePlan:
        return AcceptancePlan(scenario=self.acceptance_scenario,
                              duration_ms=self.acceptance_duration_ms)

    # --- live engine ------------------------------------------------------

    def load_scenario(self, config: ScenarioConfig):
        """Replace the live world.  Running xApps are undeployed first so
        their lifecycle returns to AVAILABLE."""
        with self._engine_lock:
            self.stop_scenario()
            if self.ric is not None:
                for record_id in list(self.ric.running):
                    try:
                        self.ric.undeploy(record_id)
                    except XAppStoreError:
                        pass
            self.router = RmrRouter()
            self.world = World(config)
            self.ric = PseudoRic(self.router, self.world, self.store,
                                 event_sink=lambda ev: self.publish(
                                     {"kind": "SCENARIO", **_plain(ev)}))
            self.publish({"kind": "SCENARIO_LOADED",
                          "gnbs": [g.id for g in config.gnbs],
                          "ues": [u.id for u in config.ues]})

    def start_scenario(self, pace_ms: int | None = None):
        """Start the logical-clock driver.  pace_ms is the real-time delay
        per tick (default: run at tick cadence); 0 runs flat out."""
        with self._engine_lock:
            if self.world is None:
                raise WrongState("no scenario loaded")
            if self._driver is not None and self._driver.is_alive():
                return
            if pace_ms is None:
                pace_ms = self.world.config.tick_ms
            self._driver_stop.clear()
            self._driver = threading.Thread(
                target=self._drive, args=(pace_ms,), daemon=True)
            self._driver.start()

    def _drive(self, pace_ms: int):
        while not self._driver_stop.is_set():
            with self._engine_lock:
                self.ric.tick()
            if pace_ms > 0:
                self._driver_stop.wait(pace_ms / 1000.0)

    def stop_scenario(self):
        self._driver_stop.set()
        if self._driver is not None:
            self._driver.join(timeout=5)
            self._driver = None

    def scenario_running(self) -> bool:
        return self._driver is not None and self._driver.is_alive()

    def tick(self, n: int = 1):
        """Manual stepping, used by tests and the single-step API."""
        with self._engine_lock:
            for _ in range(n):
                self.ric.tick()

    def deploy(self, record_id: str):
        with self._engine_lock:
            if self.ric is None:
                raise WrongState("no scenario loaded")
            return self.ric.deploy(record_id)

    def undeploy(self, record_id: str):
        with self._engine_lock:
            if self.ric is None:
                raise NotRunning("no scenario loaded")
            self.ric.undeploy(record_id)

    def ric_status(self) -> dict:
        with self._engine_lock:
            status = self.ric.status() if self.ric else {"running_xapps": []}
            status["scenario_running"] = self.scenario_running()
            return status

    def scenario_state(self) -> dict:
        with self._engine_lock:
            if self.world is None:
                raise NotRunning("no scenario loaded")
            snap = self.world.snapshot()
            snap["running"] = self.scenario_running()
            return snap

    def shutdown(self):
        self.stop_scenario()
        self.store.persist()


def _plain(ev) -> dict:
    # scenario events may carry non-JSON fields (live indication objects)
    return json.loads(json.dumps(
        {k: v for k, v in ev.items() if k != "indication"}, default=str))
