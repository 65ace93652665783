import json

import pytest
from hypothesis import given, settings, strategies as st

from xappstore.errors import ParseError
from xappstore.manifest import (SemVer, canonicalize, manifest_digest,
                                parse_manifest, validate_manifest)

from conftest import SCHEMA_PATH, minimal_manifest_doc


def parse_doc(doc):
    return parse_manifest(json.dumps(doc).encode())


class TestParse:
    def test_minimal_document_fills_defaults(self):
        m = parse_doc(minimal_manifest_doc())
        assert m.security.allow_external_endpoints is False
        assert m.health.liveness_period_ms == 1000
        assert m.health.failure_threshold == 3
        assert m.service_models == frozenset()
        assert m.rx_mtypes == frozenset({12011, 12050})

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ParseError) as e:
            parse_doc(minimal_manifest_doc(colour="blue"))
        assert e.value.reason == "unknown_top_level_field"
        assert e.value.path == "colour"

    def test_missing_required_field(self):
        doc = minimal_manifest_doc()
        del doc["author"]
        with pytest.raises(ParseError) as e:
            parse_doc(doc)
        assert e.value.reason == "missing_field"
        assert e.value.path == "author"

    def test_two_part_version_rejected(self):
        # independent semver grammar: exactly three dot-separated numerics
        with pytest.raises(ParseError) as e:
            parse_doc(minimal_manifest_doc(version="1.2"))
        assert e.value.reason == "malformed_document"
        assert e.value.path == "version"

    @pytest.mark.parametrize("bad", ["1", "1.2.3.4", "v1.2.3", "1.02.3", "a.b.c", ""])
    def test_semver_grammar(self, bad):
        with pytest.raises(ParseError):
            parse_doc(minimal_manifest_doc(version=bad))

    def test_not_json(self):
        with pytest.raises(ParseError) as e:
            parse_manifest(b"{nope")
        assert e.value.reason == "malformed_document"

    def test_mtypes_must_be_integers(self):
        with pytest.raises(ParseError) as e:
            parse_doc(minimal_manifest_doc(rx_mtypes=["100"]))
        assert e.value.path == "rx_mtypes[0]"


class TestValidate:
    def test_in_range_ric_version_valid(self):
        m = parse_doc(minimal_manifest_doc())
        result = validate_manifest(m, {"ric_version": "1.4.0"})
        assert result.valid
        assert result.violations == []

    def test_max_is_exclusive(self):
        m = parse_doc(minimal_manifest_doc())
        result = validate_manifest(m, {"ric_version": "2.0.0"})
        assert not result.valid
        assert any(v.code == "COMPAT_RIC_VERSION" for v in result.violations)

    def test_negative_mtype_flagged_with_path(self):
        m = parse_doc(minimal_manifest_doc(rx_mtypes=[-5]))
        result = validate_manifest(m)
        hits = [v for v in result.violations if v.code == "MTYPE_DOMAIN"]
        assert hits and hits[0].path == "rx_mtypes[0]"

    def test_mtype_above_domain(self):
        m = parse_doc(minimal_manifest_doc(tx_mtypes=[2**31]))
        assert not validate_manifest(m).valid

    def test_rc_service_model_warns_but_valid(self):
        m = parse_doc(minimal_manifest_doc(service_models=["KPM", "RC"]))
        result = validate_manifest(m)
        assert result.valid
        assert any(v.code == "SERVICE_MODEL_UNSUPPORTED"
                   and v.severity == "warning" for v in result.violations)

    def test_rx_tx_overlap_permitted(self):
        m = parse_doc(minimal_manifest_doc(rx_mtypes=[100], tx_mtypes=[100]))
        assert validate_manifest(m).valid

    def test_empty_ric_range(self):
        m = parse_doc(minimal_manifest_doc(
            ric_compat={"min": "2.0.0", "max": "2.0.0"}))
        result = validate_manifest(m)
        assert any(v.code == "RIC_COMPAT_EMPTY" for v in result.violations)

    def test_validation_is_deterministic(self):
        m = parse_doc(minimal_manifest_doc(rx_mtypes=[-1, 5]))
        a = validate_manifest(m, {"ric_version": "9.0.0"})
        b = validate_manifest(m, {"ric_version": "9.0.0"})
        assert a.violations == b.violations


class TestCanonicalize:
    def test_round_trip_fixpoint(self):
        m = parse_doc(minimal_manifest_doc())
        c = canonicalize(m)
        assert canonicalize(parse_manifest(c)) == c

    def test_key_order_irrelevant(self):
        doc = minimal_manifest_doc()
        shuffled = json.dumps(dict(reversed(list(doc.items()))))
        assert (canonicalize(parse_manifest(shuffled.encode()))
                == canonicalize(parse_doc(doc)))

    def test_one_mtype_changes_digest(self):
        a = parse_doc(minimal_manifest_doc())
        b = parse_doc(minimal_manifest_doc(rx_mtypes=[12011, 12051]))
        assert manifest_digest(a) != manifest_digest(b)

    def test_set_order_irrelevant(self):
        a = parse_doc(minimal_manifest_doc(rx_mtypes=[1, 2, 3]))
        b = parse_doc(minimal_manifest_doc(rx_mtypes=[3, 1, 2]))
        assert canonicalize(a) == canonicalize(b)


# --- generated manifests --------------------------------------------------

_name = st.from_regex(r"[a-z0-9]([a-z0-9-]{0,10}[a-z0-9])?", fullmatch=True)
_semver = st.tuples(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20)).map(
    lambda t: f"{t[0]}.{t[1]}.{t[2]}")
_mtypes = st.lists(st.integers(0, 2**31 - 1), max_size=6, unique=True)


@st.composite
def manifest_docs(draw):
    lo = draw(st.tuples(st.integers(0, 3), st.integers(0, 5), st.integers(0, 5)))
    hi = (lo[0] + draw(st.integers(1, 3)), draw(st.integers(0, 5)),
          draw(st.integers(0, 5)))
    doc = {
        "name": draw(_name),
        "version": draw(_semver),
        "author": draw(st.text(min_size=1, max_size=12)),
        "license": draw(st.sampled_from(["MIT", "Apache-2.0", "BSD-3-Clause"])),
        "ric_compat": {"min": "{}.{}.{}".format(*lo), "max": "{}.{}.{}".format(*hi)},
        "resources": {"cpu_millicores": draw(st.integers(1, 4000)),
                      "memory_mib": draw(st.integers(1, 8192))},
        "rx_mtypes": draw(_mtypes),
        "tx_mtypes": draw(_mtypes),
    }
    if draw(st.booleans()):
        doc["service_models"] = draw(st.lists(
            st.sampled_from(["KPM", "RC"]), max_size=2, unique=True))
    if draw(st.booleans()):
        doc["health"] = {"liveness_period_ms": draw(st.integers(1, 10000)),
                         "failure_threshold": draw(st.integers(1, 10))}
    if draw(st.booleans()):
        doc["contact"] = "dev@example.org"
    if draw(st.booleans()):
        doc["security"] = {"allow_external_endpoints": draw(st.booleans())}
    if draw(st.booleans()):
        doc["dependencies"] = [{"name": "other-xapp", "version_range": ">=1.0.0"}]
    return doc


@given(manifest_docs())
@settings(max_examples=100, deadline=None)
def test_property_round_trip(doc):
    m = parse_doc(doc)
    c = canonicalize(m)
    assert parse_manifest(c) == m
    assert canonicalize(parse_manifest(c)) == c


@given(manifest_docs())
@settings(max_examples=50, deadline=None)
def test_schema_oracle_agrees_on_valid(doc):
    # the published JSON Schema accepts what our validator accepts
    import jsonschema
    m = parse_doc(doc)
    if validate_manifest(m).valid:
        schema = json.loads(SCHEMA_PATH.read_text())
        jsonschema.validate(doc, schema)


CORRUPTIONS = [
    ("name", ""), ("name", "UPPER"), ("version", "1.2"),
    ("author", ""), ("license", ""),
    ("ric_compat", {"min": "2.0.0", "max": "1.0.0"}),
    ("resources", {"cpu_millicores": 0, "memory_mib": 64}),
    ("resources", {"cpu_millicores": 100, "memory_mib": -1}),
    ("rx_mtypes", [-1]), ("tx_mtypes", [2**31]),
    ("health", {"liveness_period_ms": 0, "failure_threshold": 3}),
    ("health", {"liveness_period_ms": 1000, "failure_threshold": 0}),
    ("contact", "not-an-email"),
    ("service_models", ["XYZ"]),
]


@pytest.mark.parametrize("field,value", CORRUPTIONS)
def test_single_field_corruption_names_the_field(field, value):
    doc = minimal_manifest_doc(**{field: value})
    try:
        m = parse_doc(doc)
    except ParseError as e:
        assert e.path.split(".")[0].split("[")[0] == field
        return
    result = validate_manifest(m)
    assert not result.valid or any(v.severity == "warning" and
                                   v.path.startswith(field)
                                   for v in result.violations)
    offending = [v for v in result.violations if v.path.split(".")[0].split("[")[0] == field]
    assert offending, f"no violation names {field}: {result.violations}"


def test_semver_ordering():
    assert SemVer.parse("1.9.0") < SemVer.parse("1.10.0") < SemVer.parse("2.0.0")
