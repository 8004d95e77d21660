"""
Tests for the release identifier.
"""

import os
import tempfile
from pathlib import Path
from unittest.mock import patch

from dipolesim.version import UNRELEASED, get_cached_version, read_release

from .test_base import BaseSimulationTestCase


class ReleaseTestCase(BaseSimulationTestCase):
    """Test cases for resolving the release recorded in manifests."""

    def setUp(self):
        """Create a temporary VERSION file and clear any override."""
        super().setUp()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.version_file = Path(tmp.name) / "VERSION"
        patcher = patch.dict(os.environ, {}, clear=False)
        patcher.start()
        self.addCleanup(patcher.stop)
        os.environ.pop("DIPOLESIM_VERSION", None)

    def test_version_file(self):
        """Test that the VERSION file is the release."""
        self.version_file.write_text("v0.3.1\n", encoding="utf-8")
        release = read_release(self.version_file)
        self.assertEqual((release.version, release.source), ("v0.3.1", "file"))

    def test_environment_override(self):
        """Test that DIPOLESIM_VERSION takes precedence over the file."""
        self.version_file.write_text("v0.3.1\n", encoding="utf-8")
        os.environ["DIPOLESIM_VERSION"] = " build-42 "
        release = read_release(self.version_file)
        self.assertEqual((release.version, release.source), ("build-42", "environment"))

    def test_missing_or_empty_file(self):
        """Test the unreleased fallback."""
        self.assertEqual(read_release(self.version_file).version, UNRELEASED)
        self.version_file.write_text("  \n", encoding="utf-8")
        self.assertEqual(read_release(self.version_file).source, "default")

    def test_cached_version_is_stable(self):
        """Test that the per-process version does not change."""
        self.assertEqual(get_cached_version(), get_cached_version())
