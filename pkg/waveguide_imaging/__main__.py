"""
Entry point for running the toolkit as a module.

    python -m waveguide_imaging <subcommand> ...
"""

import sys

from .main import main

if __name__ == "__main__":
    sys.exit(main())
