"""xApp manifest parsing, validation and canonical serialization.

The manifest is the machine-readable contract an xApp ships with: identity,
RIC compatibility range, declared tx/rx message types, resource requests and
health-probe settings.  Parsing is strict (unknown top-level keys are
rejected) so the published schema stays authoritative.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from .errors import ParseError

MTYPE_MAX = 2**31  # message-type IDs are non-negative 31-bit integers

KNOWN_SERVICE_MODELS = {"KPM", "RC"}
SUPPORTED_SERVICE_MODELS = {"KPM"}  # RC is accepted but flagged, not runnable

DEFAULT_LIVENESS_PERIOD_MS = 1000
DEFAULT_FAILURE_THRESHOLD = 3

_DNS_LABEL_RE = re.compile(r"^[a-z0-9]([a-z0-9-]{0,61}[a-z0-9])?$")
_SEMVER_RE = re.compile(r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)$")
_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")

TOP_LEVEL_REQUIRED = (
    "name", "version", "author", "license", "ric_compat",
    "resources", "rx_mtypes", "tx_mtypes",
)
TOP_LEVEL_OPTIONAL = ("contact", "service_models", "health", "dependencies", "security")
TOP_LEVEL_KEYS = set(TOP_LEVEL_REQUIRED) | set(TOP_LEVEL_OPTIONAL)


@dataclass(frozen=True, order=True)
class SemVer:
    major: int
    minor: int
    patch: int

    @classmethod
    def parse(cls, text) -> "SemVer":
        if not isinstance(text, str):
            raise ValueError(f"not a version string: {text!r}")
        m = _SEMVER_RE.match(text)
        if not m:
            raise ValueError(f"not a semantic version: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"


@dataclass(frozen=True)
class VersionRange:
    """min-inclusive, max-exclusive semver interval."""

    min: SemVer
    max: SemVer

    def contains(self, v: SemVer) -> bool:
        return self.min <= v < self.max


@dataclass(frozen=True)
class Resources:
    cpu_millicores: int
    memory_mib: int


@dataclass(frozen=True)
class HealthConfig:
    liveness_period_ms: int = DEFAULT_LIVENESS_PERIOD_MS
    failure_threshold: int = DEFAULT_FAILURE_THRESHOLD


@dataclass(frozen=True)
class Dependency:
    name: str
    version_range: str


@dataclass(frozen=True)
class SecurityConfig:
    allow_external_endpoints: bool = False


@dataclass(frozen=True)
class XAppManifest:
    name: str
    version: SemVer
    author: str
    license: str
    ric_compat: VersionRange
    resources: Resources
    rx_mtypes: frozenset
    tx_mtypes: frozenset
    contact: str = ""
    service_models: frozenset = frozenset()
    health: HealthConfig = HealthConfig()
    dependencies: tuple = ()
    security: SecurityConfig = SecurityConfig()


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    detail: str
    severity: str = "error"


@dataclass
class ValidationResult:
    violations: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not any(v.severity == "error" for v in self.violations)


def _expect(cond: bool, reason: str, path: str, detail: str):
    if not cond:
        raise ParseError(reason, path, detail)


def _parse_int(value, path: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool),
            "malformed_document", path, f"expected integer at {path}")
    return value


def _parse_str(value, path: str) -> str:
    _expect(isinstance(value, str), "malformed_document", path,
            f"expected string at {path}")
    return value


def _parse_semver(value, path: str) -> SemVer:
    _parse_str(value, path)
    try:
        return SemVer.parse(value)
    except ValueError as e:
        raise ParseError("malformed_document", path, str(e)) from None


def _parse_mtypes(value, path: str):
    _expect(isinstance(value, list), "malformed_document", path,
            f"expected array at {path}")
    out = []
    for i, item in enumerate(value):
        out.append(_parse_int(item, f"{path}[{i}]"))
    return frozenset(out)


def _parse_obj(value, path: str, allowed: set) -> dict:
    _expect(isinstance(value, dict), "malformed_document", path,
            f"expected object at {path}")
    for key in value:
        _expect(key in allowed, "malformed_document", f"{path}.{key}",
                f"unknown key {key!r} in {path}")
    return value


def parse_manifest(raw: bytes) -> XAppManifest:
    """Parse a UTF-8 JSON manifest document into an XAppManifest.

    Strict mode: unknown top-level keys raise ParseError(unknown_top_level_field);
    missing required keys raise ParseError(missing_field); structural or type
    problems raise ParseError(malformed_document).  Defaults (health probe,
    security) are applied here so the result is fully populated.
    """
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError("malformed_document", "", f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("malformed_document", "", "top level must be an object")

    for key in doc:
        if key not in TOP_LEVEL_KEYS:
            raise ParseError("unknown_top_level_field", key,
                             f"unknown top-level field {key!r}")
    for key in TOP_LEVEL_REQUIRED:
        if key not in doc:
            raise ParseError("missing_field", key,
                             f"required field {key!r} is missing")

    rc = _parse_obj(doc["ric_compat"], "ric_compat", {"min", "max"})
    for k in ("min", "max"):
        _expect(k in rc, "missing_field", f"ric_compat.{k}",
                f"ric_compat requires {k!r}")
    ric_compat = VersionRange(_parse_semver(rc["min"], "ric_compat.min"),
                              _parse_semver(rc["max"], "ric_compat.max"))

    res = _parse_obj(doc["resources"], "resources", {"cpu_millicores", "memory_mib"})
    for k in ("cpu_millicores", "memory_mib"):
        _expect(k in res, "missing_field", f"resources.{k}",
                f"resources requires {k!r}")
    resources = Resources(_parse_int(res["cpu_millicores"], "resources.cpu_millicores"),
                          _parse_int(res["memory_mib"], "resources.memory_mib"))

    service_models = frozenset()
    if "service_models" in doc:
        sm = doc["service_models"]
        _expect(isinstance(sm, list), "malformed_document", "service_models",
                "expected array at service_models")
        service_models = frozenset(
            _parse_str(s, f"service_models[{i}]") for i, s in enumerate(sm))

    health = HealthConfig()
    if "health" in doc:
        h = _parse_obj(doc["health"], "health",
                       {"liveness_period_ms", "failure_threshold"})
        health = HealthConfig(
            _parse_int(h.get("liveness_period_ms", DEFAULT_LIVENESS_PERIOD_MS),
                       "health.liveness_period_ms"),
            _parse_int(h.get("failure_threshold", DEFAULT_FAILURE_THRESHOLD),
                       "health.failure_threshold"))

    dependencies = []
    if "dependencies" in doc:
        deps = doc["dependencies"]
        _expect(isinstance(deps, list), "malformed_document", "dependencies",
                "expected array at dependencies")
        for i, d in enumerate(deps):
            dd = _parse_obj(d, f"dependencies[{i}]", {"name", "version_range"})
            for k in ("name", "version_range"):
                _expect(k in dd, "missing_field", f"dependencies[{i}].{k}",
                        f"dependency requires {k!r}")
            dependencies.append(Dependency(
                _parse_str(dd["name"], f"dependencies[{i}].name"),
                _parse_str(dd["version_range"], f"dependencies[{i}].version_range")))

    security = SecurityConfig()
    if "security" in doc:
        s = _parse_obj(doc["security"], "security", {"allow_external_endpoints"})
        allow = s.get("allow_external_endpoints", False)
        _expect(isinstance(allow, bool), "malformed_document",
                "security.allow_external_endpoints", "expected boolean")
        security = SecurityConfig(allow)

    contact = ""
    if "contact" in doc:
        contact = _parse_str(doc["contact"], "contact")

    return XAppManifest(
        name=_parse_str(doc["name"], "name"),
        version=_parse_semver(doc["version"], "version"),
        author=_parse_str(doc["author"], "author"),
        license=_parse_str(doc["license"], "license"),
        ric_compat=ric_compat,
        resources=resources,
        rx_mtypes=_parse_mtypes(doc["rx_mtypes"], "rx_mtypes"),
        tx_mtypes=_parse_mtypes(doc["tx_mtypes"], "tx_mtypes"),
        contact=contact,
        service_models=service_models,
        health=health,
        dependencies=tuple(dependencies),
        security=security,
    )


def validate_manifest(m: XAppManifest, ric_profile: dict | None = None) -> ValidationResult:
    """Check every manifest invariant; pure and deterministic.

    All problems are reported as violations with stable codes, never raised.
    When `ric_profile` carries {"ric_version": SemVer-or-str}, compatibility
    against the hosting RIC version is checked too.
    """
    result = ValidationResult()

    def err(code, path, detail):
        result.violations.append(Violation(code, path, detail))

    def warn(code, path, detail):
        result.violations.append(Violation(code, path, detail, severity="warning"))

    if not m.name:
        err("MISSING_FIELD", "name", "name must be non-empty")
    elif not _DNS_LABEL_RE.match(m.name):
        err("NAME_NOT_DNS_SAFE", "name",
            f"{m.name!r} is not a lowercase DNS label (<=63 chars)")
    if not m.author:
        err("MISSING_FIELD", "author", "author must be non-empty")
    if not m.license:
        err("MISSING_FIELD", "license", "license must be non-empty")
    if m.contact and not _EMAIL_RE.match(m.contact):
        err("CONTACT_NOT_EMAIL", "contact", f"{m.contact!r} is not email-shaped")

    if not m.ric_compat.min < m.ric_compat.max:
        err("RIC_COMPAT_EMPTY", "ric_compat",
            f"min {m.ric_compat.min} must be < max {m.ric_compat.max}")

    if m.resources.cpu_millicores <= 0:
        err("RESOURCE_NOT_POSITIVE", "resources.cpu_millicores",
            "cpu_millicores must be positive")
    if m.resources.memory_mib <= 0:
        err("RESOURCE_NOT_POSITIVE", "resources.memory_mib",
            "memory_mib must be positive")

    for fname, mtypes in (("rx_mtypes", m.rx_mtypes), ("tx_mtypes", m.tx_mtypes)):
        for i, t in enumerate(sorted(mtypes)):
            if not (0 <= t < MTYPE_MAX):
                err("MTYPE_DOMAIN", f"{fname}[{i}]",
                    f"mtype {t} outside [0, 2^31)")

    for i, sm in enumerate(sorted(m.service_models)):
        if sm not in KNOWN_SERVICE_MODELS:
            err("SERVICE_MODEL_UNKNOWN", f"service_models[{i}]",
                f"unknown service model {sm!r}")
        elif sm not in SUPPORTED_SERVICE_MODELS:
            warn("SERVICE_MODEL_UNSUPPORTED", f"service_models[{i}]",
                 f"service model {sm!r} accepted but not runnable at runtime")

    if m.health.liveness_period_ms <= 0:
        err("HEALTH_NOT_POSITIVE", "health.liveness_period_ms",
            "liveness_period_ms must be positive")
    if m.health.failure_threshold < 1:
        err("HEALTH_NOT_POSITIVE", "health.failure_threshold",
            "failure_threshold must be >= 1")

    for i, dep in enumerate(m.dependencies):
        if not dep.name:
            err("MISSING_FIELD", f"dependencies[{i}].name",
                "dependency name must be non-empty")

    if ric_profile is not None:
        rv = ric_profile["ric_version"]
        if isinstance(rv, str):
            rv = SemVer.parse(rv)
        if not m.ric_compat.contains(rv):
            err("COMPAT_RIC_VERSION", "ric_compat",
                f"RIC version {rv} outside [{m.ric_compat.min}, {m.ric_compat.max})")

    return result


def manifest_to_dict(m: XAppManifest) -> dict:
    """Plain-dict form with sets sorted; the document canonicalize serializes."""
    return {
        "name": m.name,
        "version": str(m.version),
        "author": m.author,
        "license": m.license,
        "contact": m.contact,
        "ric_compat": {"min": str(m.ric_compat.min), "max": str(m.ric_compat.max)},
        "resources": {"cpu_millicores": m.resources.cpu_millicores,
                      "memory_mib": m.resources.memory_mib},
        "rx_mtypes": sorted(m.rx_mtypes),
        "tx_mtypes": sorted(m.tx_mtypes),
        "service_models": sorted(m.service_models),
        "health": {"liveness_period_ms": m.health.liveness_period_ms,
                   "failure_threshold": m.health.failure_threshold},
        "dependencies": [{"name": d.name, "version_range": d.version_range}
                         for d in m.dependencies],
        "security": {"allow_external_endpoints": m.security.allow_external_endpoints},
    }


def canonicalize(m: XAppManifest) -> bytes:
    """Deterministic byte serialization: sorted keys, sorted sets, no padding.

    Equal manifests always produce identical bytes, so the digest of this
    output is a stable identity for store deduplication.
    """
    return json.dumps(manifest_to_dict(m), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


def manifest_digest(m: XAppManifest) -> str:
    return hashlib.sha256(canonicalize(m)).hexdigest()
