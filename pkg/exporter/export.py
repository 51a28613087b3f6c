#!/usr/bin/env python3
"""Export a benchmark dataset: python export.py --dataset cora --out data/cora"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from planetoid_export.cli import main

if __name__ == "__main__":
    sys.exit(main())
