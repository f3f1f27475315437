#!/usr/bin/env python3
"""
cwcodes Launcher
================
Runs the workbench CLI from a source checkout.

    python scripts/cwcodes_cli.py construct 7 4 3 4 --out code.txt
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from cwcodes.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
