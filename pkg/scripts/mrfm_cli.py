#!/usr/bin/env python3
"""
MRFM Spin Detection CLI

Runs the package command-line interface from a source checkout.
"""

import sys
from pathlib import Path


# Add src to path for module imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from mrfm_spin_detection.cli import main  # noqa: E402


if __name__ == "__main__":
    main()
