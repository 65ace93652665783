import json
from pathlib import Path

import pytest

from xappstore.archive import PackageArchive, pack_archive, pack_directory

REPO_ROOT = Path(__file__).resolve().parents[1]
PACKAGES_DIR = REPO_ROOT / "packages"
SCENARIOS_DIR = REPO_ROOT / "scenarios"
SCHEMA_PATH = REPO_ROOT / "schema" / "xapp-manifest.v1.json"


def package_bytes(name: str) -> bytes:
    return pack_directory(PACKAGES_DIR / name)


def scenario_bytes(name: str) -> bytes:
    return (SCENARIOS_DIR / f"{name}.json").read_bytes()


def minimal_manifest_doc(**overrides) -> dict:
    doc = {
        "name": "test-xapp",
        "version": "1.0.0",
        "author": "Tester",
        "license": "MIT",
        "ric_compat": {"min": "1.0.0", "max": "2.0.0"},
        "resources": {"cpu_millicores": 100, "memory_mib": 64},
        "rx_mtypes": [12011, 12050],
        "tx_mtypes": [12010],
    }
    doc.update(overrides)
    return doc


def make_package(manifest_doc=None, behavior_doc=None, assets=None) -> PackageArchive:
    manifest_doc = manifest_doc if manifest_doc is not None else minimal_manifest_doc()
    behavior_doc = behavior_doc if behavior_doc is not None else {
        "on_start": [], "rules": [], "health_behavior": "ALWAYS_OK"}
    return PackageArchive(
        json.dumps(manifest_doc).encode(),
        json.dumps(behavior_doc).encode(),
        assets or {})


def make_archive_bytes(manifest_doc=None, behavior_doc=None) -> bytes:
    return pack_archive(make_package(manifest_doc, behavior_doc))


@pytest.fixture
def two_gnb_config():
    from xappstore.scenario import ScenarioConfig
    return ScenarioConfig.from_json(scenario_bytes("two-gnb-crossing"))


@pytest.fixture
def three_ue_config():
    from xappstore.scenario import ScenarioConfig
    return ScenarioConfig.from_json(scenario_bytes("three-ue-loop"))
