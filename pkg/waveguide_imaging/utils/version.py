"""
Version utilities for the waveguide imaging toolkit.

The tool version is recorded in every run manifest.
"""

from .. import __version__, __author__, __email__, __description__


def get_version() -> str:
    """Get the current version string (e.g., "1.0.0")."""
    return __version__


def get_version_info() -> dict:
    """Get version, author, email and description as a dictionary."""
    return {
        "version": __version__,
        "author": __author__,
        "email": __email__,
        "description": __description__,
    }


def get_full_version_string() -> str:
    """Formatted string like "waveguide-imaging v1.0.0"."""
    return f"waveguide-imaging v{__version__}"


VERSION = __version__
