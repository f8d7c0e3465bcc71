#!/usr/bin/env python3
"""
Version bump utility for Waveguide Imaging.

Rewrites ``__version__`` in the package and opens a CHANGELOG section.
Run manifests record the tool version, so bump it whenever output formats
or numerics change.

Usage: python update_version.py <new_version>
"""

import re
import sys
from datetime import date
from pathlib import Path

INIT_FILE = Path("waveguide_imaging/__init__.py")
CHANGELOG = Path("CHANGELOG.md")
VERSION_PATTERN = re.compile(r'__version__ = ["\']([^"\']+)["\']')


def bump_init(new_version: str) -> str:
    """Replace ``__version__``; returns the previous value."""
    if not INIT_FILE.exists():
        raise SystemExit(f"Error: {INIT_FILE} not found (run from the repository root)")
    content = INIT_FILE.read_text(encoding="utf-8")
    match = VERSION_PATTERN.search(content)
    if not match:
        raise SystemExit(f"Error: no __version__ in {INIT_FILE}")
    INIT_FILE.write_text(VERSION_PATTERN.sub(f'__version__ = "{new_version}"', content),
                         encoding="utf-8")
    return match.group(1)


def open_changelog_section(new_version: str) -> bool:
    """Insert an empty section above the newest entry unless it already exists."""
    if not CHANGELOG.exists():
        return False
    content = CHANGELOG.read_text(encoding="utf-8")
    if f"## [{new_version}]" in content:
        return False
    section = f"## [{new_version}] - {date.today().isoformat()}\n\n### Changed\n- \n\n"
    index = content.find("## [")
    content = content + "\n" + section if index < 0 else content[:index] + section + content[index:]
    CHANGELOG.write_text(content, encoding="utf-8")
    return True


def main() -> None:
    if len(sys.argv) != 2:
        raise SystemExit("Usage: python update_version.py <new_version>")
    new_version = sys.argv[1]
    if not re.match(r"^\d+\.\d+\.\d+(?:-[a-zA-Z0-9]+)?$", new_version):
        raise SystemExit(f"Error: invalid version '{new_version}' (expected X.Y.Z or X.Y.Z-suffix)")
    previous = bump_init(new_version)
    print(f"Updated {INIT_FILE}: {previous} -> {new_version}")
    if open_changelog_section(new_version):
        print(f"Opened a [{new_version}] section in {CHANGELOG}")
    print(f"Tag the release with: git tag -a v{new_version} -m 'Release v{new_version}'")


if __name__ == "__main__":
    main()
