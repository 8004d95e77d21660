#!/usr/bin/env python3
"""
Write the VERSION file that run manifests record as the release.
"""

import subprocess  # nosec B404 - Used for controlled git commands only
from typing import Optional

import typer

from dipolesim import version

VERSION_FILE = version.VERSION_FILE


def git_version() -> Optional[str]:
    """Exact tag on HEAD, otherwise the latest tag with commit info."""
    commands = (
        ["git", "describe", "--tags", "--exact-match", "HEAD"],
        ["git", "describe", "--tags", "--abbrev=7", "--dirty"],
    )
    for command in commands:
        try:
            return subprocess.check_output(  # nosec B603, B607 - Controlled git command
                command, stderr=subprocess.DEVNULL, text=True, cwd=version.REPO_ROOT
            ).strip()
        except (subprocess.CalledProcessError, FileNotFoundError):
            continue
    return None


def main(
    new_version: Optional[str] = typer.Argument(None, help="Version to write, e.g. v0.2.0 (default: from git tags)"),
):
    """Set the VERSION file and show what run manifests will record."""
    if new_version is None:
        new_version = git_version()
        if not new_version:
            typer.echo("❌ Could not determine version from git. Create a tag first: git tag v0.1.0")
            raise typer.Exit(code=1)
        typer.echo(f"🔍 Found git version: {new_version}")

    VERSION_FILE.write_text(new_version + "\n", encoding="utf-8")
    typer.echo(f"✅ Written version '{new_version}' to {VERSION_FILE.name}")

    release = version.read_release(VERSION_FILE)
    if release.version != new_version:
        typer.echo(f"⚠️  Manifests will record '{release.version}' (DIPOLESIM_VERSION is set)")


if __name__ == "__main__":
    typer.run(main)
