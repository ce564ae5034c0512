#!/usr/bin/env python3
"""
Command-line interface for py-vhalab.
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
