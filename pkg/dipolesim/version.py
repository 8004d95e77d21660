"""
Release identifier recorded in run manifests and trace resources.

The VERSION file at the repository root holds the release (for example v0.1.0) and is
written by update_version.py. DIPOLESIM_VERSION overrides it for builds that stamp their
own identifier.
"""

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

REPO_ROOT = Path(__file__).parent.parent
VERSION_FILE = REPO_ROOT / "VERSION"
UNRELEASED = "v0.0.0-unreleased"


@dataclass(frozen=True)
class Release:
    version: str
    source: str  # "environment", "file" or "default"


def read_release(version_file: Path = VERSION_FILE) -> Release:
    override = os.getenv("DIPOLESIM_VERSION", "").strip()
    if override:
        return Release(override, "environment")
    try:
        recorded = version_file.read_text(encoding="utf-8").strip()
    except OSError:
        recorded = ""
    if recorded:
        return Release(recorded, "file")
    return Release(UNRELEASED, "default")


def get_version() -> str:
    return read_release().version


@lru_cache(maxsize=None)
def get_cached_version() -> str:
    """Resolved once per process so every output of a run records the same release."""
    return get_version()
