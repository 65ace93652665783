"""xApp package archives.

A package is a zip container holding `manifest.json`, `behavior.json` and an
optional `assets/` tree.  The package digest hashes the member contents (not
the zip container) so re-zipping identical files yields the same identity.
"""
from __future__ import annotations

import hashlib
import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedArchive

MANIFEST_MEMBER = "manifest.json"
BEHAVIOR_MEMBER = "behavior.json"
ASSETS_PREFIX = "assets/"


@dataclass
class PackageArchive:
    manifest_bytes: bytes
    behavior_bytes: bytes
    assets: dict = field(default_factory=dict)

    def digest(self) -> str:
        h = hashlib.sha256()
        members = {MANIFEST_MEMBER: self.manifest_bytes,
                   BEHAVIOR_MEMBER: self.behavior_bytes}
        for name, data in self.assets.items():
            members[ASSETS_PREFIX + name] = data
        for name in sorted(members):
            h.update(name.encode("utf-8") + b"\x00")
            h.update(members[name] + b"\x00")
        return h.hexdigest()


def pack_archive(pkg: PackageArchive) -> bytes:
    buf = io.BytesIO()
    # fixed date_time keeps archives byte-stable across packings
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        def add(name, data):
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, data)
        add(MANIFEST_MEMBER, pkg.manifest_bytes)
        add(BEHAVIOR_MEMBER, pkg.behavior_bytes)
        for name in sorted(pkg.assets):
            add(ASSETS_PREFIX + name, pkg.assets[name])
    return buf.getvalue()


def load_archive(raw: bytes) -> PackageArchive:
    """Unpack and structurally check an uploaded archive."""
    try:
        zf = zipfile.ZipFile(io.BytesIO(raw))
    except (zipfile.BadZipFile, ValueError) as e:
        raise MalformedArchive(f"not a zip archive: {e}") from None
    names = set(zf.namelist())
    if MANIFEST_MEMBER not in names:
        raise MalformedArchive(f"archive missing {MANIFEST_MEMBER}")
    if BEHAVIOR_MEMBER not in names:
        raise MalformedArchive(f"archive missing {BEHAVIOR_MEMBER}")
    manifest_bytes = zf.read(MANIFEST_MEMBER)
    behavior_bytes = zf.read(BEHAVIOR_MEMBER)
    try:
        doc = json.loads(manifest_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedArchive(f"manifest.json is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise MalformedArchive("manifest.json top level must be an object")
    assets = {}
    for name in sorted(names):
        if name.startswith(ASSETS_PREFIX) and not name.endswith("/"):
            assets[name[len(ASSETS_PREFIX):]] = zf.read(name)
    return PackageArchive(manifest_bytes, behavior_bytes, assets)


def pack_directory(path) -> bytes:
    """Build an archive from a package source tree (the fetch-and-pack step:
    organise local files into the standardised container)."""
    root = Path(path)
    manifest = root / MANIFEST_MEMBER
    behavior = root / BEHAVIOR_MEMBER
    if not manifest.is_file():
        raise MalformedArchive(f"{manifest} not found")
    if not behavior.is_file():
        raise MalformedArchive(f"{behavior} not found")
    assets = {}
    assets_dir = root / "assets"
    if assets_dir.is_dir():
        for p in sorted(assets_dir.rglob("*")):
            if p.is_file():
                assets[str(p.relative_to(assets_dir))] = p.read_bytes()
    return pack_archive(PackageArchive(manifest.read_bytes(),
                                       behavior.read_bytes(), assets))


def peek_name_version(pkg: PackageArchive):
    """Best-effort (name, version) from the raw manifest, for duplicate
    checks before full validation has run."""
    try:
        doc = json.loads(pkg.manifest_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        return None, None
    if not isinstance(doc, dict):
        return None, None
    name = doc.get("name") if isinstance(doc.get("name"), str) else None
    version = doc.get("version") if isinstance(doc.get("version"), str) else None
    return name, version
